"""Command-line front end: ``ergoham solve | sweep | verify | report``.

Exit codes: 0 success, 1 configuration or validation error, 2 solver
non-convergence or failure, 3 acceptance-check failure (verify).
Any config key can be overridden as ``--key value`` (or ``--section.key value``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

from . import acceptance, experiments as ex
from .config import ConfigError, RunConfig, load, parse_value
from .grid import SpaceTimeField, TimeGrid, TorusGrid
from .hamiltonians import parse_hamiltonian
from .io import _clean, read_field, write_field, write_json
from .params import OperatorParams, SolverError
from .potentials import recipe
from .report import regenerate, write_outputs
from .solve import solve

log = logging.getLogger("ergoham")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3

ALIASES = {"H": "hamiltonian", "experiment": "operation", "out": "directory"}


@dataclass
class RunReport:
    config: dict
    operation: str
    results: dict
    rows: list
    checks: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    def as_dict(self) -> dict:
        """Serializable form; wall-clock time is kept out so reports are reproducible."""
        return {"config": self.config, "operation": self.operation, "results": self.results,
                "rows": self.rows, "checks": self.checks}


def build_problem(cfg: RunConfig):
    p = cfg.problem
    if p["field_file"]:
        m = read_field(p["field_file"])
    else:
        space = TorusGrid(p["dim"], p["n"])
        time = TimeGrid(p["period"], p["nt"])
        params = dict(p["potential_params"])
        if p["potential"] == "random":
            params.setdefault("seed", cfg.experiment["seed"])
        m = recipe(p["potential"], space, time, **params)
    H = parse_hamiltonian(p["hamiltonian"])
    adv = tuple(p["advection"]) if p["advection"] else None
    op = OperatorParams(tau=p["tau"], mu=p["mu"], eps=p["eps"], direction=p["direction"],
                        advection=adv, method=p["method"])
    return m, H, op


def _solve_report(cfg: RunConfig, m: SpaceTimeField, H, op) -> tuple:
    kw = cfg.solver_options()
    if cfg.problem["route"] == "relaxation" or (
            cfg.problem["route"] == "auto" and not H.is_isotropic_quadratic()):
        kw["max_periods"] = cfg.tolerances["max_periods"]
    else:
        kw["max_iters"] = cfg.tolerances["max_iters"]
    res = solve(m, H, op, route=cfg.problem["route"], **kw)
    phi0 = res.field.values[0]
    results = {"lambda": res.lam, "residual": res.residual, "iterations": res.iterations,
               "route": res.diagnostics.get("route", "linear"), "params": op.as_dict(),
               "hamiltonian": H.describe(), "phi_slice": phi0.tolist()}
    row = {"lambda": res.lam, "residual": res.residual, "iterations": res.iterations}
    return results, [row], res


def _sweep(cfg: RunConfig, m, H, op) -> tuple[dict, list, dict]:
    e, p = cfg.experiment, cfg.problem
    values = [float(v) for v in e["values"]]
    workers = e["workers"]
    kw = cfg.solver_options()
    name = e["operation"]
    if name == "frequency":
        res = ex.sweep_frequency(m, values, H, p["mu"], p["eps"], workers=workers, **kw)
        rows = [{"tau": r["tau"], "lambda": r["lambda"], "limit_low": r["limit_low"],
                 "limit_high": r["limit_high"], "monotone_ok": r["monotone_ok"],
                 "residual": r.get("residual")} for r in res.rows()]
    elif name == "diffusion":
        res = ex.sweep_diffusion(m, values, H, p["tau"], workers=workers, **kw)
        rows = res.rows()
    elif name == "large_heat":
        res = ex.large_heat_slope(m, values, H, p["tau"], p["mu"], p["direction"],
                                  workers=workers, **kw)
        rows = res.rows()
    elif name == "blowup":
        bound_eps = e["bound_eps"] or None
        res = ex.amplitude_probe(m, values, H, p["tau"], p["mu"], bound_eps, workers=workers, **kw)
        rows = res.rows()
    elif name == "reversibility":
        two = tuple(e["two_mode"]) if e["two_mode"] else None
        if two is not None:
            two = (int(two[0]), int(two[1]), float(two[2]))
        rep = ex.reversibility_probe(H, m, values, p["tau"], p["mu"], two, workers=workers, **kw)
        d = rep.as_dict()
        rows = [{"eps": v, "lambda_forward": a, "lambda_backward": b}
                for v, a, b in zip(d["eps"], d["lambda_forward"], d["lambda_backward"])]
        return d, rows, d["checks"]
    elif name == "advection":
        res = ex.advection_limit(m.values[0], m.space, e["flow"], values, H, workers=workers,
                                 **kw)
        rows = res.rows()
    else:
        raise ConfigError(f"{name!r} is not a sweep")
    return res.as_dict(), rows, res.checks


def run(cfg: RunConfig, write: bool = True) -> RunReport:
    """Execute the configured operation and write its outputs."""
    t0 = _time.perf_counter()
    m, H, op = build_problem(cfg)
    out_dir = Path(cfg.output["directory"])
    formats = cfg.output["formats"]
    name = cfg.experiment["operation"]
    fields = {}
    if name == "solve":
        results, rows, res = _solve_report(cfg, m, H, op)
        checks = {}
        fields = {"m": m, "phi": res.field}
    else:
        results, rows, checks = _sweep(cfg, m, H, op)
    # one JSON round trip so stored and regenerated outputs are byte-identical
    data = json.loads(json.dumps(_clean({"config": cfg.as_dict(), "operation": name,
                                         "results": results, "rows": rows, "checks": checks})))
    report = RunReport(data["config"], name, data["results"], data["rows"], data["checks"],
                       _time.perf_counter() - t0)
    if write:
        write_outputs(report.as_dict(), out_dir, formats)
        write_json(out_dir / "timing.json", {"wall_clock": report.wall_clock})
        if fields and ("ergh" in formats or cfg.output["fields"]):
            for key, f in fields.items():
                write_field(out_dir / f"{key}.ergh", f)
    return report


# ---------------------------------------------------------------------------

def _overrides(extra: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, _, value = key.partition("=")
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"--{key} needs a value")
            value = extra[i + 1]
            i += 2
        sec, dot, bare = key.replace("-", "_").rpartition(".")
        bare = ALIASES.get(bare, bare)
        key = f"{sec}{dot}{bare}"
        out[key] = parse_value(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergoham",
        description="Principal eigenvalues of time-periodic viscous Hamilton-Jacobi operators.",
        epilog="Any config key may be given as --key value.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "solve one eigenproblem"),
                       ("sweep", "run one experiment sweep")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="TOML run configuration")
    v = sub.add_parser("verify", help="run acceptance suites")
    v.add_argument("--suite", default="all", help=f"one of all, {', '.join(acceptance.SUITES)}")
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--out", default=None, help="write the suite report as JSON here")
    r = sub.add_parser("report", help="regenerate tables and figures from a stored run")
    r.add_argument("path", help="run directory or report.json")
    r.add_argument("--no-render", action="store_true", help="write plot scripts only")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("verify", "report") and extra:
            raise ConfigError(f"unexpected arguments {extra}")
        if args.command == "verify":
            return _verify(args)
        if args.command == "report":
            for path in regenerate(args.path, render_png=not args.no_render):
                print(path)
            return EXIT_OK
        overrides = _overrides(extra)
        if args.command == "solve":
            overrides.setdefault("operation", "solve")
            if overrides["operation"] != "solve":
                raise ConfigError("use the sweep subcommand for experiments")
        cfg = load(args.config, overrides)
        if args.command == "sweep" and cfg.experiment["operation"] == "solve":
            raise ConfigError("sweep needs --experiment <operation>")
        report = run(cfg)
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    res = report.results
    if report.operation == "solve":
        print(f"lambda = {res['lambda']!r}")
        print(f"residual = {res['residual']!r}")
    else:
        for row in report.rows:
            print("  ".join(f"{k}={v}" for k, v in row.items()))
        for k, v in report.checks.items():
            print(f"check {k}: {'ok' if v else 'FAILED'}")
    print(f"outputs in {cfg.output['directory']}")
    return EXIT_OK


def _verify(args) -> int:
    try:
        results = acceptance.run_suite(args.suite, workers=args.workers, echo=print)
    except SolverError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    total = sum(r.runtime for r in results)
    print(f"total {total:.1f} s")
    if args.out:
        write_json(args.out, {"suite": args.suite, "results": [r.as_dict() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())

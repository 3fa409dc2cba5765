"""Run configuration: a sectioned TOML file validated before anything is solved.

Sections and keys (all optional, defaults shown by :data:`DEFAULTS`)::

    [problem]     dim n nt period potential potential_params field_file
                  hamiltonian tau mu eps direction advection method route
    [experiment]  operation values seed workers bound_eps two_mode flow
    [output]      directory formats fields
    [tolerances]  tol max_iters max_periods

Keys are unique across sections, so command-line overrides use the bare key
(``--tau 2``) or the dotted form (``--problem.tau 2``).
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OPERATIONS = ("solve", "frequency", "diffusion", "large_heat", "blowup", "reversibility",
              "advection")
FORMATS = ("csv", "json", "ergh", "plots")

DEFAULTS = {
    "problem": {
        "dim": 1, "n": 128, "nt": 64, "period": 1.0,
        "potential": "traveling_bump", "potential_params": {}, "field_file": "",
        "hamiltonian": "quadratic",
        "tau": 1.0, "mu": 1.0, "eps": 1.0, "direction": "forward", "advection": [],
        "method": "spectral", "route": "auto",
    },
    "experiment": {
        "operation": "solve", "values": [], "seed": 0, "workers": 1,
        "bound_eps": 0.0, "two_mode": [], "flow": "irrational",
    },
    "output": {"directory": "ergoham_out", "formats": ["csv", "json", "ergh", "plots"],
               "fields": False},
    "tolerances": {"tol": 0.0, "max_iters": 2000, "max_periods": 2000},
}

_TYPES = {
    "dim": int, "n": int, "nt": int, "period": float, "potential": str, "potential_params": dict,
    "field_file": str, "hamiltonian": str, "tau": float, "mu": float, "eps": float,
    "direction": str, "advection": list, "method": str, "route": str,
    "operation": str, "values": list, "seed": int, "workers": int, "bound_eps": float,
    "two_mode": list, "flow": str,
    "directory": str, "formats": list, "fields": bool,
    "tol": float, "max_iters": int, "max_periods": int,
}

SECTION_OF = {key: sec for sec, keys in DEFAULTS.items() for key in keys}


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    problem: dict
    experiment: dict
    output: dict
    tolerances: dict

    def as_dict(self) -> dict:
        return {"problem": dict(self.problem), "experiment": dict(self.experiment),
                "output": dict(self.output), "tolerances": dict(self.tolerances)}

    def solver_options(self) -> dict:
        """Tolerance overrides as keywords for the solvers (zero means default)."""
        out = {}
        if self.tolerances["tol"] > 0:
            out["tol"] = self.tolerances["tol"]
        return out


def _coerce(key: str, value):
    kind = _TYPES[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, kind):
        return value
    raise ConfigError(f"{SECTION_OF[key]}.{key} must be {kind.__name__}, got {value!r}")


def _check(cfg: dict):
    p, e, o = cfg["problem"], cfg["experiment"], cfg["output"]
    if p["dim"] not in (1, 2):
        raise ConfigError(f"problem.dim must be 1 or 2, got {p['dim']}")
    if p["n"] < 8 or p["n"] % 2:
        raise ConfigError(f"problem.n must be even and >= 8, got {p['n']}")
    if p["nt"] < 1:
        raise ConfigError(f"problem.nt must be >= 1, got {p['nt']}")
    for key in ("period", "tau", "mu"):
        if not p[key] > 0:
            raise ConfigError(f"problem.{key} must be positive, got {p[key]}")
    if p["eps"] < 0:
        raise ConfigError(f"problem.eps must be non-negative, got {p['eps']}")
    if p["direction"] not in ("forward", "backward"):
        raise ConfigError(f"problem.direction must be forward or backward, got {p['direction']!r}")
    if p["method"] not in ("spectral", "fd"):
        raise ConfigError(f"problem.method must be spectral or fd, got {p['method']!r}")
    if p["route"] not in ("auto", "linear", "relaxation"):
        raise ConfigError(f"problem.route must be auto, linear or relaxation, got {p['route']!r}")
    if p["advection"] and len(p["advection"]) != p["dim"]:
        raise ConfigError("problem.advection needs one component per dimension")
    if e["operation"] not in OPERATIONS:
        raise ConfigError(f"experiment.operation must be one of {OPERATIONS}, "
                          f"got {e['operation']!r}")
    if e["operation"] != "solve" and not e["values"]:
        raise ConfigError(f"experiment.values is required for {e['operation']!r}")
    if e["two_mode"] and len(e["two_mode"]) != 3:
        raise ConfigError("experiment.two_mode is [j, l, amplitude]")
    if e["workers"] < 1:
        raise ConfigError("experiment.workers must be >= 1")
    bad = set(o["formats"]) - set(FORMATS)
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}; choose from {FORMATS}")
    try:
        [float(v) for v in e["values"]]
    except (TypeError, ValueError):
        raise ConfigError("experiment.values must be numbers") from None


def build(data: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge ``data`` (parsed sections) and flat ``overrides`` into a validated config."""
    cfg = copy.deepcopy(DEFAULTS)
    for sec, block in (data or {}).items():
        if sec not in cfg:
            raise ConfigError(f"unknown section [{sec}]")
        if not isinstance(block, dict):
            raise ConfigError(f"[{sec}] must be a table")
        for key, value in block.items():
            if key not in cfg[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")
            cfg[sec][key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        sec, _, bare = key.rpartition(".")
        if bare not in SECTION_OF or (sec and SECTION_OF[bare] != sec):
            raise ConfigError(f"unknown key {key!r}")
        cfg[SECTION_OF[bare]][bare] = _coerce(bare, value)
    _check(cfg)
    return RunConfig(**cfg)


def load(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from None
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"bad config {path}: {err}") from None
    return build(data, overrides)


def parse_value(key: str, text: str):
    """Parse a command-line override with TOML syntax; bare words stay strings."""
    bare = key.rpartition(".")[2]
    if _TYPES.get(bare) is str:
        return text
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text

"""Plot descriptions and their rendering.

A run never draws anything.  It writes, per figure, a data file
``<name>.data.json`` and a self-contained script ``<name>.plot.py`` that reads
the data and saves ``<name>.png`` with matplotlib.  :func:`render` executes
those scripts in a separate interpreter and is what the ``report`` subcommand
calls.
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from .io import read_json, write_csv, write_json

_SCRIPT = '''"""Render {name}.png from {name}.data.json."""
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
spec = json.loads((here / "{name}.data.json").read_text())

fig, ax = plt.subplots(figsize=(5.0, 3.6))
if spec["kind"] == "image":
    im = ax.imshow(spec["z"], origin="lower", extent=[0, 1, 0, 1], aspect="auto")
    fig.colorbar(im, ax=ax)
else:
    for s in spec["series"]:
        ax.plot(spec["x"], s["y"], marker=s.get("marker", "o"), label=s["label"])
    for h in spec.get("hlines", []):
        ax.axhline(h["y"], ls="--", lw=1.0, color="0.4")
        ax.annotate(h["label"], (spec["x"][0], h["y"]), fontsize=8, va="bottom")
    if spec.get("logx"):
        ax.set_xscale("log")
    ax.legend(frameon=False, fontsize=8)
ax.set_xlabel(spec["xlabel"])
ax.set_ylabel(spec["ylabel"])
ax.set_title(spec["title"], fontsize=10)
fig.tight_layout()
fig.savefig(here / "{name}.png", dpi=120)
plt.close(fig)
'''


def write_plot(directory: str | Path, name: str, spec: dict) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / f"{name}.data.json", spec)
    script = directory / f"{name}.plot.py"
    script.write_text(_SCRIPT.format(name=name))
    return script


def plot_specs(report: dict) -> dict:
    """Figure descriptions for a stored run report."""
    op = report["operation"]
    res = report["results"]
    if op == "solve":
        snap = res.get("phi_slice")
        if snap is None:
            return {}
        if isinstance(snap[0], list):
            return {"solve_phi": {"kind": "image", "z": snap, "xlabel": "x", "ylabel": "y",
                                  "title": f"corrector at t = 0, lambda = {res['lambda']:.6g}"}}
        n = len(snap)
        return {"solve_phi": {"kind": "line", "x": [i / n for i in range(n)],
                              "series": [{"label": "phi(0, x)", "y": snap, "marker": ""}],
                              "xlabel": "x", "ylabel": "phi",
                              "title": f"corrector at t = 0, lambda = {res['lambda']:.6g}"}}
    if op == "reversibility":
        return {"reversibility": {
            "kind": "line", "x": res["eps"], "logx": True, "xlabel": "eps", "ylabel": "lambda",
            "series": [{"label": "forward", "y": res["lambda_forward"]},
                       {"label": "backward", "y": res["lambda_backward"]}],
            "title": "forward and backward eigenvalues"}}
    y = res["extra"]["eps_lambda"] if op == "blowup" else res["lambda"]
    hlines = [{"y": v, "label": k} for k, v in res["limits"].items()]
    if op == "large_heat":
        y = res["extra"]["slope"]
        hlines = [{"y": res["limits"]["prediction"], "label": "prediction"}]
    label = {"blowup": "eps * lambda", "large_heat": "slope"}.get(op, "lambda")
    return {op: {"kind": "line", "x": res["values"], "logx": True, "xlabel": res["parameter"],
                 "ylabel": label, "series": [{"label": label, "y": y}], "hlines": hlines,
                 "title": op.replace("_", " ")}}


def write_outputs(report: dict, directory: str | Path, formats) -> list[Path]:
    """CSV, JSON and plot descriptions for a report dict."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    if "json" in formats:
        out.append(write_json(directory / "report.json", report))
    if "csv" in formats:
        out.append(write_csv(directory / "results.csv", report["rows"]))
    if "plots" in formats:
        for name, spec in plot_specs(report).items():
            out.append(write_plot(directory, name, spec))
    return out


def render(directory: str | Path) -> list[Path]:
    """Run every ``*.plot.py`` in ``directory`` as a script; returns the PNG paths."""
    pngs = []
    for script in sorted(Path(directory).glob("*.plot.py")):
        done = subprocess.run([sys.executable, str(script)], capture_output=True, text=True)
        if done.returncode:
            raise ValueError(f"{script.name} failed:\n{done.stderr.strip()}")
        pngs.append(script.with_name(script.name.replace(".plot.py", ".png")))
    return pngs


def regenerate(path: str | Path, render_png: bool = True) -> list[Path]:
    """Rewrite CSV and plot files from a stored ``report.json`` without solving."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    report = read_json(path)
    out = write_outputs(report, path.parent, ("csv", "plots"))
    if render_png:
        out += render(path.parent)
    return out

import json

import numpy as np
import pytest

from ergoham import config
from ergoham.cli import main
from ergoham.grid import SpaceTimeField, TimeGrid, TorusGrid
from ergoham.io import FieldFormatError, format_number, read_field, write_csv, write_field

SMALL = ["--n", "16", "--nt", "8"]


def test_field_roundtrip(tmp_path):
    space, time = TorusGrid(2, 8), TimeGrid(0.5, 8)
    f = SpaceTimeField(np.random.default_rng(0).standard_normal((8, 8, 8)), space, time)
    path = write_field(tmp_path / "f.ergh", f)
    g = read_field(path)
    assert np.array_equal(g.values, f.values)
    assert g.time.period == 0.5 and g.space.dim == 2
    meta = json.loads((tmp_path / "f.json").read_text())
    assert meta["shape"] == [8, 8, 8]


def test_field_bad_magic_and_size(tmp_path):
    space, time = TorusGrid(1, 8), TimeGrid(1.0, 8)
    path = write_field(tmp_path / "f.ergh", SpaceTimeField(np.zeros((8, 8)), space, time),
                       sidecar=False)
    raw = path.read_bytes()
    (tmp_path / "bad.ergh").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FieldFormatError):
        read_field(tmp_path / "bad.ergh")
    (tmp_path / "short.ergh").write_bytes(raw[:-8])
    with pytest.raises(FieldFormatError):
        read_field(tmp_path / "short.ergh")


def test_csv_is_exact(tmp_path):
    write_csv(tmp_path / "r.csv", [{"a": 0.1, "b": True}, {"a": 1 / 3, "c": [1, 2]}])
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "a,b,c"
    assert float(lines[2].split(",")[0]) == 1 / 3
    assert format_number(0.1) == "0.10000000000000001"


def test_config_validation(tmp_path):
    with pytest.raises(config.ConfigError):
        config.build({"problem": {"bogus": 1}})
    with pytest.raises(config.ConfigError):
        config.build({"nowhere": {}})
    with pytest.raises(config.ConfigError):
        config.build(overrides={"tau": "fast"})
    with pytest.raises(config.ConfigError):
        config.build(overrides={"operation": "frequency"})
    with pytest.raises(config.ConfigError):
        config.build(overrides={"n": 12 + 1})
    toml = tmp_path / "run.toml"
    toml.write_text('[problem]\ntau = 2\nhamiltonian = "power:r=4"\n'
                    '[experiment]\noperation = "frequency"\nvalues = [0.5, 1.0]\n')
    cfg = config.load(toml, {"problem.mu": 0.5})
    assert cfg.problem["tau"] == 2.0 and cfg.problem["mu"] == 0.5
    assert cfg.experiment["values"] == [0.5, 1.0]
    assert config.parse_value("values", "[1, 2]") == [1, 2]
    assert config.parse_value("potential", "random") == "random"


def test_solve_constant_potential(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["solve", "--potential", "constant", "--potential_params", "{value = 2.0}",
                 *SMALL, "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["results"]["lambda"] == pytest.approx(-2.0, abs=1e-12)
    assert (out / "phi.ergh").exists() and (out / "m.ergh").exists()
    assert "wall_clock" not in report
    assert "lambda =" in capsys.readouterr().out


def test_solve_from_field_file(tmp_path):
    space, time = TorusGrid(1, 16), TimeGrid(1.0, 8)
    m = SpaceTimeField(np.full((8, 16), 0.5), space, time)
    write_field(tmp_path / "m.ergh", m)
    out = tmp_path / "run"
    assert main(["solve", "--field_file", str(tmp_path / "m.ergh"), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["results"]["lambda"] == pytest.approx(-0.5, abs=1e-12)


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", "--tau", "-1", "--out", str(tmp_path / "a")]) == 1
    assert main(["solve", "--nonsense", "1"]) == 1
    assert main(["sweep", "--out", str(tmp_path / "b")]) == 1
    assert main(["solve", "--config", str(tmp_path / "missing.toml")]) == 1
    code = main(["solve", "--H", "power:r=4", *SMALL, "--max_periods", "1",
                 "--tol", "1e-14", "--out", str(tmp_path / "c")])
    assert code == 2
    assert "solver error" in capsys.readouterr().err


def test_sweep_report_regeneration(tmp_path):
    out = tmp_path / "sweep"
    args = ["sweep", "--experiment", "frequency", "--values", "[0.5, 1.0, 2.0]", *SMALL,
            "--out", str(out)]
    assert main(args) == 0
    csv_before = (out / "results.csv").read_bytes()
    report_before = (out / "report.json").read_bytes()
    assert main(["report", str(out)]) == 0
    assert (out / "results.csv").read_bytes() == csv_before
    assert (out / "frequency.png").stat().st_size > 0
    # a second identical run writes the same report
    assert main(args) == 0
    assert (out / "report.json").read_bytes() == report_before
    assert json.loads((out / "timing.json").read_text())["wall_clock"] > 0


def test_verify_single_suite(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert main(["verify", "--suite", "blowup", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["results"][0]["passed"]
    assert "PASS" in capsys.readouterr().out
    assert main(["verify", "--suite", "nope"]) == 1

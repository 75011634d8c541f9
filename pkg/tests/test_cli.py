import json

import numpy as np
import pytest

from lasercov.cli import main, parse_grid
from lasercov.errors import ConfigError


def test_parse_grid():
    assert parse_grid("0:1:0.25") == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
    assert parse_grid("1e-16:1e-14:3", geometric=True) == pytest.approx([1e-16, 1e-15, 1e-14])
    assert parse_grid("3,5,9") == pytest.approx([3, 5, 9])
    for bad in ("5,3", "1:0:1", "0:1:0", "0:1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_rstar_outputs(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["rstar", "--axis", "cn2", "--grid", "0,1e-15,1e-14", "--out", str(out), "--plot-script"]) == 0
    rows = [l.split(",") for l in out.read_text().splitlines()]
    assert rows[0] == ["cn2[m^-2/3]", "R_star[m]", "R_star_no_turbulence[m]"]
    assert rows[1][1] == rows[1][2]
    r = [float(x[1]) for x in rows[1:]]
    assert np.all(np.diff(r) < 0)
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["seed"] == 20240611 and side["config"]["laser.cn2"] == 0.5e-14
    assert out.with_suffix(".png").exists()
    assert (tmp_path / "r_plot.py").exists()


def test_exit_codes(tmp_path, capsys):
    assert main(["coverage", "--set", "laser.delta_s=2", "--out", str(tmp_path / "x.csv")]) == 2
    assert "laser.delta_s" in capsys.readouterr().err
    assert main(["rstar", "--set", "laser.p_trans=100", "--out", str(tmp_path / "y.csv")]) == 3


def test_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("env.label = SubUrban\nr_star = 1100\n")
    out = tmp_path / "a.csv"
    assert main(["altitude", "--config", str(cfg), "--grid", "50,100", "--env", "SubUrban",
                 "--out", str(out), "--no-figure"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "env,h[m],R_star[m],C_analytic[-]" and len(lines) == 3
    assert lines[1].split(",")[2] == "1100"


def test_coverage_rerun_is_identical(tmp_path):
    args = ["coverage", "--env", "Urban", "--grid=-5,5", "--iterations", "30", "--no-figure"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()

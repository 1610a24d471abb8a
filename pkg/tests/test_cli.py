import csv
import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from alrd_doa import cli
from alrd_doa.errors import SingularityError

SMALL = {
    "geometry": {"M": 12},
    "scenario": {"doas": [50.0, 95.0], "snr_list": [0.0, 10.0, 20.0], "N": 15, "correlated_pair": None, "seed": 2},
    "estimators": [{"method": "malrd", "I": 4, "D": 2}, {"method": "esprit"}],
    "harness": {"trials": 3, "grid_start": 1.0, "grid_stop": 179.0, "grid_step": 2.0},
}


def _write(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_spectrum_default_grid_has_599_rows(tmp_path):
    cfg = _write(tmp_path, {"estimators": [{"method": "music"}]})
    assert cli.main(["spectrum", "--config", cfg, "--method", "music", "--out", str(tmp_path)]) == 0
    rows = _read(tmp_path / "spectrum_music.csv")
    assert rows[0] == ["angle_deg", "power"]
    assert len(rows) == 600
    angles = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(angles) > 0)
    mantissa = rows[1][1].split("e")[0].replace("-", "").replace(".", "")
    assert "e" in rows[1][1] and len(mantissa) >= 12


def test_spectrum_one_angle_grid_and_determinism(tmp_path):
    doc = dict(SMALL, harness={"trials": 1, "grid_start": 60.0, "grid_stop": 60.0, "grid_step": 1.0})
    cfg = _write(tmp_path, doc)
    assert cli.main(["spectrum", "--config", cfg, "--method", "malrd", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["spectrum", "--config", cfg, "--method", "malrd", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "spectrum_malrd.csv").read_bytes()
    assert a == (tmp_path / "b" / "spectrum_malrd.csv").read_bytes()
    assert len(a.decode().splitlines()) == 2
    assert b"\r" not in a


def test_spectrum_rejects_esprit(tmp_path):
    cfg = _write(tmp_path, SMALL)
    assert cli.main(["spectrum", "--config", cfg, "--method", "esprit", "--out", str(tmp_path)]) == 2


def test_sweep_rows_header_and_plot_script(tmp_path):
    doc = dict(SMALL, output={"directory": str(tmp_path / "o"), "emit_plot_script": True})
    cfg = _write(tmp_path, doc)
    assert cli.main(["sweep", "--config", cfg, "--threads", "1"]) == 0
    rows = _read(tmp_path / "o" / "sweep.csv")
    assert ",".join(rows[0]) == cli.SWEEP_HEADER
    assert len(rows) == 1 + 2 * 3
    for r in rows[1:]:
        assert 0.0 <= float(r[3]) <= 1.0 and r[2] == "3"
    script = (tmp_path / "o" / "plot_sweep.py").read_text()
    assert "sweep.csv" in script and str(tmp_path) not in script
    compile(script, "plot_sweep.py", "exec")


def test_sweep_seed_override_changes_output(tmp_path):
    cfg = _write(tmp_path, SMALL)
    cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"])
    cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "1", "--seed", "77"])
    cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "c"), "--threads", "1", "--seed", "2"])
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a != (tmp_path / "b" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "c" / "sweep.csv").read_bytes()


@pytest.mark.parametrize(
    "doc",
    [dict(SMALL, harness={"trials": 0}), dict(SMALL, bogus={}), dict(SMALL, scenario={"doas": [10], "rho": 2.0})],
)
def test_invalid_config_exit_2(tmp_path, doc, capsys):
    cfg = _write(tmp_path, doc)
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_and_bad_flags(tmp_path):
    assert cli.main(["sweep", "--config", str(tmp_path / "none.yaml")]) == 2
    assert cli.main(["sweep"]) == 2
    assert cli.main(["sweep", "--config", "x", "--threads", "-1"]) == 2


def test_estimator_failure_exit_3(tmp_path, monkeypatch):
    def boom(*args, **kw):
        raise SingularityError("singular")

    monkeypatch.setattr(cli, "compute_spectrum", boom)
    cfg = _write(tmp_path, SMALL)
    assert cli.main(["spectrum", "--config", cfg, "--method", "malrd", "--out", str(tmp_path)]) == 3


def test_selftest_passes_and_lists_checks(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert sum(line.startswith("PASS") for line in out.splitlines()) >= 10


def test_selftest_corrupted_alpha_fails(capsys):
    assert cli.main(["selftest", "--corrupt-alpha", "1.5"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  tracked-inverse" in out and "alrd-constraint" in out.split("failed:")[1]


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "alrd_doa", "selftest"], capture_output=True, text=True,
                         cwd=tmp_path, env=dict(os.environ))
    assert out.returncode == 0, out.stderr

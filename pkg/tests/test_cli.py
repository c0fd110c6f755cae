import subprocess
import sys

import pytest

from fweno.cli import build_parser, main


def _cfg(tmp_path, text, name="x.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_convergence_run_prints_outputs(tmp_path, capsys):
    cfg = _cfg(tmp_path, "experiment=advection\nr=3\nN=40\nT=0.05\n")
    assert main(["convergence", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip().endswith("advection_fweno_r3.csv")


def test_bad_config_exits_1_with_line(tmp_path, capsys):
    cfg = _cfg(tmp_path, "experiment=advection\ncfl=1.5\n")
    assert main(["convergence", "--config", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("fweno: error:") and "x.cfg:2" in err


def test_missing_config_and_mismatched_command(tmp_path, capsys):
    assert main(["shock", "--config", str(tmp_path / "nope.cfg")]) == 1
    cfg = _cfg(tmp_path, "experiment=sod\nN=50\n")
    assert main(["convergence", "--config", str(cfg)]) == 1
    assert "cannot run" in capsys.readouterr().err
    assert main(["convergence", "--config", str(cfg), "--threads", "0"]) == 1


def test_threshold_failure_exits_2(tmp_path, capsys):
    # two coarse grids cannot show fifth order, so the order check fails
    cfg = _cfg(tmp_path, "experiment=advection\nr=3\nN=4,6\nT=0.05\n")
    assert main(["convergence", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "below" in capsys.readouterr().err


def test_parser_rejects_unknown_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["plot", "--config", "x"])


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, "experiment=advection\nr=2\nN=20\nT=0.05\n")
    proc = subprocess.run([sys.executable, "-m", "fweno.cli", "convergence", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "advection_fweno_r2.csv").exists()

import csv

import numpy as np
import pytest

from fweno.experiments import (EXIT_OK, EXIT_THRESHOLD, ConfigError, cmd_2d, cmd_convergence, cmd_shock,
                               load_config, op_count_report, parse_config, time_indicators,
                               with_overrides)
from fweno.io import read_convergence_csv, read_field, read_pgm
from fweno.models import Splitting
from fweno.solver import DtRule


def test_minimal_config():
    spec = parse_config("experiment=advection\nr=3\nvariant=fweno\nN=40,80")
    assert spec.experiment == "advection" and spec.r == [3] and spec.variants == ["fweno"]
    assert spec.grids == [40, 80]


def test_full_config_keys():
    spec = parse_config("""
        # comment line
        experiment = riemann2d
        variants = JS, yc, fweno   # trailing comment
        r = 3, 5
        N = 64x32
        cfl = 0.4
        s2 = 2
        eps = 1e-40
        splitting = donat-marquina
        T = 0.1
        dt_rule = order-matched
        reference_N = 0
        instrument = yes
        seed = 7
    """)
    assert spec.variants == ["js", "yc", "fweno"] and spec.r == [3, 5]
    assert spec.grids == [(64, 32)] and spec.reference_N == ()
    assert spec.splitting is Splitting.DONAT_MARQUINA and spec.dt_rule is DtRule.ORDER_MATCHED
    assert spec.instrument and spec.seed == 7 and spec.eps == 1e-40
    v = spec.variant("fweno", spec.load_problem())
    assert v.s2 == 2


def test_s2_default_comes_from_problem():
    spec = parse_config("experiment=riemann2d")
    assert spec.variant("fweno", spec.load_problem()).s2 == 2
    spec = parse_config("experiment=riemann2d\ns2=1")
    assert spec.variant("fweno", spec.load_problem()).s2 == 1
    assert parse_config("experiment=advection\nN=10").variant("fweno", None).s2 == 1


@pytest.mark.parametrize("text,where", [
    ("experiment=advection\ncfl=1.5", "cfg:2"),
    ("experiment=advection\n\nwidth=3", "cfg:3"),
    ("experiment=advection\nr=three", "cfg:2"),
    ("experiment=advection\nnonsense", "cfg:2"),
    ("experiment=advection\nN=10,,20", "cfg:2"),
    ("experiment=advection\ncfl=0", "cfg:2"),
])
def test_bad_lines_report_their_line_number(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(text, "cfg")


@pytest.mark.parametrize("text", ["r=3", "experiment=vortex", "experiment=advection\nr=9",
                                  "experiment=advection\nvariant=mp5"])
def test_invalid_specs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_and_defaults(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("experiment=dmr\n")
    spec = load_config(p)
    assert spec.grids == [(512, 128)]
    assert with_overrides(spec, instrument=True).instrument


def test_shipped_configs_parse():
    from pathlib import Path

    cfgs = sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.cfg"))
    assert cfgs
    for path in cfgs:
        load_config(path)


def test_wrong_command_for_experiment(tmp_path):
    with pytest.raises(ConfigError, match="cannot run"):
        cmd_shock(parse_config("experiment=advection\nN=10"), tmp_path)


def test_convergence_table_and_exit_status(tmp_path):
    spec = parse_config("experiment=advection\nvariant=fweno\nr=2\nN=10,20,40\nT=0.5")
    res = cmd_convergence(spec, tmp_path)
    rows = read_convergence_csv(tmp_path / "advection_fweno_r2.csv")
    assert [r["N"] for r in rows] == [10, 20, 40]
    # orders recomputed from the written errors reproduce the written orders
    for a, b in zip(rows, rows[1:]):
        assert b["L1_order"] == pytest.approx(np.log2(a["L1"] / b["L1"]), rel=1e-12)
    assert res.status in (EXIT_OK, EXIT_THRESHOLD)
    assert (res.status == EXIT_OK) == (rows[-1]["L1_order"] >= 2.5)


def test_single_grid_has_blank_orders(tmp_path):
    res = cmd_convergence(parse_config("experiment=advection\nr=3\nN=40\nT=0.1"), tmp_path)
    assert res.status == EXIT_OK
    lines = (tmp_path / "advection_fweno_r3.csv").read_text().splitlines()
    assert lines[0] == "N,L1,L1_order,Linf,Linf_order"
    cells = lines[1].split(",")
    assert cells[0] == "40" and cells[2] == "" and cells[4] == ""


def test_convergence_is_deterministic(tmp_path):
    text = "experiment=burgers-smooth\nvariant=yc,fweno\nr=3\nN=20,40\nT=0.1\nseed=3"
    cmd_convergence(parse_config(text), tmp_path / "a")
    cmd_convergence(parse_config(text), tmp_path / "b")
    for name in ("burgers-smooth_yc_r3.csv", "burgers-smooth_fweno_r3.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_shock_command_writes_dumps_and_summary(tmp_path, monkeypatch):
    monkeypatch.setenv("FWENO_CACHE", str(tmp_path / "cache"))
    spec = parse_config("experiment=burgers-shock\nvariant=js,fweno\nr=3\nN=40\nT=1.0\nreference_N=120")
    res = cmd_shock(spec, tmp_path / "out")
    assert res.status == EXIT_OK
    d = read_field(tmp_path / "out" / "burgers-shock_fweno_r3_N40.dat")
    assert d.U.shape == (1, 40) and d.t == 1.0 and d.model == "burgers"
    with open(tmp_path / "out" / "burgers-shock_js_r3.csv") as f:
        row = next(csv.DictReader(f))
    assert float(row["overshoot"]) <= 1e-10 and float(row["L1"]) < 0.05
    assert (tmp_path / "out" / "burgers-shock.png").stat().st_size > 0
    # the reference was cached and is reused
    assert len(list((tmp_path / "cache").glob("*.npy"))) == 1


def test_uniform_state_stays_constant(tmp_path):
    spec = parse_config("experiment=uniform2d\nvariant=js,yc,fweno\nr=3\nN=16x12")
    res = cmd_2d(spec, tmp_path)
    for kind in ("js", "yc", "fweno"):
        info, run = res.data[(kind, 3, "16x12")]
        assert info["max_change"] <= 1e-12
    img = read_pgm(tmp_path / "uniform2d_fweno_r3_N16x12.pgm")
    assert img.shape == (12, 16) and np.all(img == 255)
    lines = (tmp_path / "uniform2d_summary.csv").read_text().splitlines()
    assert lines[0].endswith("rel_l1_rho_vs_yc") and len(lines) == 4


def test_op_count_report_matches_everywhere():
    rows = op_count_report()
    assert all(r["match"] for r in rows)
    by = {(r["variant"], r["r"], r["s2"]): r["total"] for r in rows}
    assert by[("fweno", 5, 1)] == 143 and by[("js", 5, 1)] == 233


def test_indicator_timing_shape():
    t = time_indicators(3, windows=2000, min_seconds=0.01)
    assert t["fast_indicators"] > 0 and t["js_indicators"] > 0
    assert t["ratio_js"] == t["js_indicators"] / t["fast_indicators"]


def test_double_mach_smoke(tmp_path):
    res = cmd_2d(parse_config("experiment=dmr\nvariant=fweno\nr=3\nN=64x16\nT=0.02"), tmp_path)
    info, run = res.data[("fweno", 3, "64x16")]
    assert run.t == 0.02 and info["min_rho"] > 0 and info["min_p"] > 0
    assert read_pgm(tmp_path / "dmr_fweno_r3_N64x16.pgm").shape == (16, 64)

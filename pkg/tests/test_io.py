import math

import numpy as np
import pytest

from fweno.io import (convergence_rows, observed_order, read_convergence_csv, read_field, read_pgm,
                      schlieren, write_convergence_csv, write_field, write_pgm)


def test_field_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    U = rng.standard_normal((4, 5, 3)) * 10.0 ** rng.integers(-30, 30, (4, 5, 3))
    path = write_field(tmp_path / "f.dat", U, (0.25, 1 / 3), 0.2, 1.4, "euler2d")
    d = read_field(path)
    np.testing.assert_array_equal(d.U, U)
    assert d.h == (0.25, 1 / 3) and d.t == 0.2 and d.gamma == 1.4 and d.model == "euler2d"
    U1 = rng.standard_normal((3, 7))
    np.testing.assert_array_equal(read_field(write_field(tmp_path / "g.dat", U1, 0.1, 1.0, 1.4, "euler1d")).U, U1)


def test_truncated_field_is_rejected(tmp_path):
    path = write_field(tmp_path / "f.dat", np.ones((1, 4)), 0.5, 0.0, 1.4, "burgers")
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:-1]) + "\n1 1 1\n")
    with pytest.raises(ValueError, match="expected 4"):
        read_field(path)
    path.write_text("model burgers\n")
    with pytest.raises(ValueError, match="malformed"):
        read_field(path)


def test_schlieren_and_pgm(tmp_path):
    x = np.linspace(0, 1, 20)
    rho = np.where(x[:, None] + 0 * x[None, :] < 0.5, 1.0, 2.0)
    img = schlieren(rho, 0.05, 0.05)
    assert img.min() == pytest.approx(math.exp(-15.0)) and img.max() == 1.0
    assert np.all(schlieren(np.ones((4, 4)), 1.0, 1.0) == 1.0)
    pix = read_pgm(write_pgm(tmp_path / "s.pgm", img))
    assert pix.shape == (20, 20)
    # y upward: image row 0 is the top, i.e. the largest y index
    np.testing.assert_array_equal(pix, np.clip(np.rint(img * 255), 0, 255).astype(np.uint8).T[::-1])


def test_convergence_table_round_trip(tmp_path):
    Ns = [10, 20, 40]
    l1 = [1e-3, 1e-3 / 32, 1e-3 / 1024]
    rows = convergence_rows(Ns, l1, [2 * e for e in l1])
    assert rows[0]["L1_order"] is None
    assert rows[1]["L1_order"] == pytest.approx(5.0, rel=1e-14)
    back = read_convergence_csv(write_convergence_csv(tmp_path / "c.csv", rows))
    assert back == rows
    single = read_convergence_csv(write_convergence_csv(tmp_path / "one.csv", convergence_rows([40], [1e-5], [2e-5])))
    assert single[0]["L1_order"] is None and single[0]["Linf_order"] is None
    assert (tmp_path / "one.csv").read_text().splitlines()[1].endswith(",")


def test_observed_order():
    assert observed_order(1.0, 1 / 32) == pytest.approx(5.0)
    assert observed_order(1.0, 1 / 9, 10, 30) == pytest.approx(2.0)
    assert math.isnan(observed_order(0.0, 1.0))

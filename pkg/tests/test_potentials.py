import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lhy_lab import potentials as P


def test_evaluate_hard_core():
    v = P.hard_core(1.0)
    assert v.evaluate(0.5) == math.inf
    assert v.evaluate(2.0) == 0.0


def test_evaluate_square_well():
    v = P.square_well(6.0, 1.0)
    assert v.evaluate(0.5) == 6.0
    assert v.evaluate(1.5) == 0.0


def test_integral_square_well():
    T0 = 2.7
    v = P.square_well(6.0 * T0, 1.0)
    assert v.integral() == pytest.approx(8.0 * math.pi * T0, rel=1e-14)


def test_integral_hard_core_infinite():
    assert P.hard_core(1.0).integral() == math.inf


def test_integral_shell():
    T = 4.2
    v = P.shell_potential(8.0 * math.pi * T, 1.0)
    assert v.integral() == pytest.approx(8.0 * math.pi * T, rel=1e-15)


def test_cap_and_cut_hard_core_becomes_well():
    v = P.cap_and_cut(P.hard_core(1.0), 6.0)
    assert not v.has_hard_core
    assert v.evaluate(0.5) == 6.0
    assert v.evaluate(1.5) == 0.0
    assert v.integral() == pytest.approx(8.0 * math.pi, rel=1e-14)


def test_cap_and_cut_above_max_is_identity():
    v = P.square_well(2.0, 1.0)
    w = P.cap_and_cut(v, 6.0)
    r = np.linspace(0, 2, 101)
    assert np.array_equal(w.evaluate(r), v.evaluate(r))


def test_cap_and_cut_tabulated_clamps():
    r = np.linspace(0.0, 1.0, 6)
    vals = np.array([10.0, 8.0, 3.0, 1.0, 0.5, 0.0])
    v = P.tabulated(r, vals)
    w = P.cap_and_cut(v, 4.0)
    rs = np.linspace(0.0, 0.999, 301)
    assert np.allclose(w.evaluate(rs), np.minimum(v.evaluate(rs), 4.0), atol=1e-12)


def test_cap_and_cut_spatial_cut():
    v = P.square_well(1.0, 3.0)
    w = P.cap_and_cut(v, 2.0)
    assert w.evaluate(2.5) == 0.0
    assert w.evaluate(1.5) == 1.0


@settings(max_examples=60, deadline=None)
@given(n1=st.floats(0.1, 50), n2=st.floats(0.1, 50), r=st.floats(0, 3))
def test_cap_monotone(n1, n2, r):
    v = P.RadialPotential(
        hard_core_radius=0.5,
        pieces=(P.ConstPiece(0.5, 1.0, 7.0), P.ConstPiece(1.0, 2.0, 0.3)),
    )
    lo, hi = sorted((n1, n2))
    v_lo, v_hi = P.cap_and_cut(v, lo), P.cap_and_cut(v, hi)
    assert v_lo.evaluate(r) <= v_hi.evaluate(r) + 1e-12
    assert v_hi.evaluate(r) <= v.evaluate(r) + 1e-12
    assert v_lo.integral() <= v_hi.integral() + 1e-9


def test_calR():
    assert P.calR(P.shell_potential(8.0 * math.pi, 2.0), 1.0) == pytest.approx(1.0)
    assert P.calR(P.RadialPotential(), 1.0) == 0.0
    with pytest.raises(ValueError):
        P.calR(P.hard_core(1.0), 1.0)


def test_tail_integral():
    v = P.square_well(6.0, 1.0)
    assert v.tail_integral(0.0) == pytest.approx(v.integral())
    assert v.tail_integral(1.0) == 0.0
    vs = P.shell_potential(5.0, 1.0)
    assert vs.tail_integral(1.0) == 5.0
    assert vs.tail_integral(1.0 + 1e-12) == 0.0


def test_invalid_construction():
    with pytest.raises(ValueError):
        P.RadialPotential(pieces=(P.ConstPiece(0.0, 1.0, -1.0),))
    with pytest.raises(ValueError):
        P.RadialPotential(pieces=(P.ConstPiece(1.0, 0.5, 1.0),))
    with pytest.raises(ValueError):
        P.RadialPotential(hard_core_radius=1.0, pieces=(P.ConstPiece(0.2, 0.8, 1.0),))
    with pytest.raises(ValueError):
        P.tabulated([0.0, 0.5, 0.4], [1.0, 1.0, 1.0])


# -- spec files --------------------------------------------------------------


def test_parse_square_well(tmp_path):
    f = tmp_path / "well.spec"
    f.write_text("# a well\ntype = square_well\nradius = 1.0\nheight = 2.0\n")
    v = P.load_potential(f)
    assert v.evaluate(0.5) == 2.0


def test_parse_sum(tmp_path):
    f = tmp_path / "sum.spec"
    f.write_text(
        "type = sum\n\n[component]\ntype = shell\nradius = 1.5\nmass = 3.0\n"
        "\n[component]\ntype = square_well\nradius = 1.0\nheight = 2.0\n"
    )
    v = P.load_potential(f)
    assert v.evaluate(0.5) == 2.0
    assert v.shells[0].radius == 1.5
    assert v.integral() == pytest.approx(3.0 + 8.0 * math.pi / 3.0)


def test_parse_tabulated(tmp_path):
    grid = tmp_path / "grid.csv"
    grid.write_text("0.0,2.0\n0.5,1.0\n1.0,0.0\n")
    f = tmp_path / "tab.spec"
    f.write_text("type = tabulated\ngrid_file = grid.csv\n")
    v = P.load_potential(f)
    assert v.evaluate(0.25) == pytest.approx(1.5)


def test_parse_errors_carry_line_numbers(tmp_path):
    f = tmp_path / "bad.spec"
    f.write_text("type = square_well\nradius 1.0\n")
    with pytest.raises(P.PotentialSpecError) as exc:
        P.load_potential(f)
    assert exc.value.line == 2

    f.write_text("type = wiggle\n")
    with pytest.raises(P.PotentialSpecError):
        P.load_potential(f)

    f.write_text("type = square_well\nradius = 1.0\nheight = 2.0\nwidth = 3\n")
    with pytest.raises(P.PotentialSpecError) as exc:
        P.load_potential(f)
    assert exc.value.line == 4

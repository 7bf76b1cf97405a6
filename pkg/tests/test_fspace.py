import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fdatest.errors import GridMismatchError
from fdatest.fspace import (Curve, Grid, PairedDiffSample, axpby, inner, make_grid, norm,
                            row_norms, trapezoid_weights)

from conftest import finite


def test_make_grid_two_points():
    g = make_grid(0, 1, 2)
    np.testing.assert_array_equal(g.points, [0, 1])
    np.testing.assert_array_equal(g.weights, [0.5, 0.5])


def test_make_grid_three_points():
    np.testing.assert_allclose(make_grid(0, 1, 3).weights, [0.25, 0.5, 0.25])


def test_weights_sum_to_length():
    assert make_grid(0, 1, 250).weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert make_grid(-2, 3, 17).weights.sum() == pytest.approx(5.0, abs=1e-13)


@pytest.mark.parametrize("a,b,m", [(1, 1, 5), (2, 1, 5), (0, 1, 1), (0, 1, 0)])
def test_make_grid_rejects(a, b, m):
    with pytest.raises(ValueError):
        make_grid(a, b, m)


def test_grid_rejects_non_increasing():
    with pytest.raises(ValueError):
        Grid.from_points([0.0, 0.5, 0.5, 1.0])


def test_uneven_trapezoid():
    np.testing.assert_allclose(trapezoid_weights(np.array([0.0, 0.1, 1.0])), [0.05, 0.5, 0.45])


def test_inner_constants():
    g = make_grid(0, 1, 250)
    one = Curve.from_function(g, np.ones_like)
    assert inner(one, one) == pytest.approx(1.0, abs=1e-14)


def test_inner_kl_orthogonality(grid250):
    f = Curve.from_function(grid250, lambda t: np.sqrt(2) * np.sin(0.5 * np.pi * t))
    g = Curve.from_function(grid250, lambda t: np.sqrt(2) * np.sin(1.5 * np.pi * t))
    assert abs(inner(f, g)) < 1e-4
    # Independent check of the same integral with a fine midpoint rule.
    t = (np.arange(200_000) + 0.5) / 200_000
    oracle = np.mean(2 * np.sin(0.5 * np.pi * t) * np.sin(1.5 * np.pi * t))
    assert abs(oracle) < 1e-9


def test_inner_linear(grid250):
    t = Curve.from_function(grid250, lambda t: t)
    one = Curve.from_function(grid250, np.ones_like)
    assert inner(t, one) == pytest.approx(0.5, abs=1e-5)


def test_norm_examples(grid250):
    assert norm(Curve.zeros(grid250), 3) == 0.0
    assert norm(Curve(grid250, np.full(250, 2.5))) == pytest.approx(2.5, abs=1e-13)
    assert norm(Curve.from_function(grid250, lambda t: t)) == pytest.approx(1 / np.sqrt(3), abs=1e-5)


def test_norm_rejects_p_below_one(grid250):
    with pytest.raises(ValueError):
        norm(Curve.zeros(grid250), 0.5)


def test_axpby_examples(grid250, rng):
    f = Curve(grid250, rng.standard_normal(250))
    g = Curve(grid250, rng.standard_normal(250))
    np.testing.assert_array_equal(axpby(1, f, -1, f).values, 0.0)
    np.testing.assert_allclose(axpby(2, Curve.zeros(grid250), 3, g).values, 3 * g.values)
    np.testing.assert_array_equal(axpby(1, f, 1, g).values, f.values + g.values)


def test_mismatched_grids_rejected():
    f = Curve.zeros(make_grid(0, 1, 5))
    g = Curve.zeros(make_grid(0, 2, 5))
    with pytest.raises(GridMismatchError):
        inner(f, g)
    with pytest.raises(GridMismatchError):
        f + g


def test_curve_is_immutable(grid250):
    f = Curve.zeros(grid250)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_curve_rejects_nonfinite(grid250):
    with pytest.raises(ValueError):
        Curve(grid250, np.full(250, np.nan))


def test_paired_sample_from_pairs():
    g = make_grid(0, 1, 3)
    x = np.array([[0, 1, 2], [1, 1, 1]], float)
    y = x + np.array([[1, 1, 1], [2, 2, 2]])
    s = PairedDiffSample.from_pairs(g, x, y)
    for i, c in enumerate((1.0, 2.0)):
        oracle = axpby(1, Curve(g, y[i]), -1, Curve(g, x[i]))
        np.testing.assert_array_equal(s.diffs[i].values, oracle.values)
        np.testing.assert_array_equal(s.diffs[i].values, c)


def test_row_norms_match_norm(rng):
    g = make_grid(0, 1, 30)
    v = rng.standard_normal((6, 30))
    np.testing.assert_allclose(row_norms(v, g.weights), [norm(Curve(g, r)) for r in v], rtol=1e-14)


def _refinement_gaps(fn):
    norms = {m: norm(Curve.from_function(make_grid(0, 1, m), fn)) for m in (50, 100, 200, 400)}
    return [abs(norms[m] - norms[2 * m]) for m in (50, 100, 200)]


def test_refinement_convergence():
    # sin(pi t)^2 is periodic with vanishing ends, where the trapezoid rule
    # is already exact; the gaps sit at rounding level.
    assert max(_refinement_gaps(lambda t: np.sin(np.pi * t))) < 1e-14
    gaps = _refinement_gaps(np.exp)
    assert gaps[0] > gaps[1] > gaps[2]
    # Second-order rule: halving h cuts the gap by about four.
    assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.05)


curves = st.integers(2, 40).flatmap(
    lambda m: st.tuples(arrays(float, m, elements=finite), arrays(float, m, elements=finite)))


@given(curves)
def test_cauchy_schwarz(pair):
    f, g = pair
    grid = make_grid(0, 1, f.size)
    cf, cg = Curve(grid, f), Curve(grid, g)
    assert abs(inner(cf, cg)) <= norm(cf) * norm(cg) + 1e-12


@given(curves)
def test_norm_is_root_of_inner(pair):
    f, _ = pair
    c = Curve(make_grid(0, 1, f.size), f)
    # Same weighted sum on both sides.
    assert norm(c) == np.sqrt(inner(c, c))
    assert norm(c) ** 2 == pytest.approx(inner(c, c), rel=1e-15, abs=1e-300)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(0.1, 4), st.integers(2, 300))
def test_trapezoid_exact_for_linear(a0, a1, lo, width, m):
    grid = make_grid(lo, lo + width, m)
    f = Curve.from_function(grid, lambda t: a0 + a1 * t)
    one = Curve.from_function(grid, np.ones_like)
    hi = lo + width
    exact = a0 * width + a1 * (hi**2 - lo**2) / 2
    assert inner(f, one) == pytest.approx(exact, abs=1e-12 * max(1.0, abs(exact), width * 10))


@given(curves, st.floats(0.01, 100))
def test_norm_homogeneous(pair, c):
    f, _ = pair
    grid = make_grid(0, 1, f.size)
    assert norm(Curve(grid, c * f)) == pytest.approx(c * norm(Curve(grid, f)), rel=1e-12, abs=1e-300)


@given(curves, st.sampled_from([1.0, 1.5, 3.0]))
def test_lp_triangle(pair, p):
    f, g = pair
    grid = make_grid(0, 1, f.size)
    cf, cg = Curve(grid, f), Curve(grid, g)
    assert norm(cf + cg, p) <= norm(cf, p) + norm(cg, p) + 1e-10

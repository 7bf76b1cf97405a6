import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdatest.fspace import Curve, make_grid
from fdatest.procsim import (ContaminationSpec, ProcessSpec, ShiftSpec, apply_shift, draw_mixture,
                             kl_basis, make_shift, sample, sample_contaminated, sample_process,
                             truncation_variance)

GRID = make_grid(0, 1, 250)
IDX = {t: int(np.argmin(np.abs(GRID.points - t))) for t in (0.25, 0.5, 1.0)}


def pointwise_var(values, t):
    return float(np.mean(values[:, IDX[t]] ** 2))  # zero-mean process


@pytest.fixture(scope="module")
def sbm_1e4():
    return sample_process(ProcessSpec.sbm(GRID), 10_000, 21).values


def test_sbm_variance_is_min_kernel(sbm_1e4):
    for t in (0.25, 0.5, 1.0):
        want = t - truncation_variance(t, 250)
        se = want * np.sqrt(2 / 10_000)
        assert abs(pointwise_var(sbm_1e4, t) - want) < 3 * se


def test_truncation_variance_oracle():
    # Partial sums of the full series reproduce min(t, t) = t.
    k = np.arange(1, 2_000_001)
    freq = (k - 0.5) * np.pi
    full = np.sum(2 * np.sin(freq * 0.5) ** 2 / freq**2)
    assert full == pytest.approx(0.5, abs=1e-6)
    assert 0 < truncation_variance(1.0, 250) < 1e-3


def test_t5_variance():
    v = sample_process(ProcessSpec.t(GRID, 5), 10_000, 22).values
    for t in (0.25, 0.5, 1.0):
        want = (t - truncation_variance(t, 250)) * 5 / 3
        se = want * np.sqrt(8 / 10_000)  # excess kurtosis of t5 is 6
        assert abs(pointwise_var(v, t) - want) < 4 * se


def test_t1_variance_blows_up():
    v = sample_process(ProcessSpec.t(GRID, 1), 10_000, 23).values
    assert pointwise_var(v, 1.0) > 50


def test_t_large_nu_close_to_sbm():
    v = sample_process(ProcessSpec.t(GRID, 200), 10_000, 24).values
    assert pointwise_var(v, 1.0) == pytest.approx(1.0, rel=0.02)


def test_prefix_property():
    spec = ProcessSpec.t(GRID, 3)
    small = sample_process(spec, 100, 7).values
    big = sample_process(spec, 1000, 7).values
    np.testing.assert_array_equal(small, big[:100])
    np.testing.assert_array_equal(sample_process(spec, 5, 7, start=10).values, big[10:15])


def test_different_seeds_differ():
    spec = ProcessSpec.sbm(GRID)
    assert not np.allclose(sample_process(spec, 3, 1).values, sample_process(spec, 3, 2).values)


def test_kl_basis_orthonormal_on_grid():
    b = kl_basis(GRID, 20)
    freq = (np.arange(1, 21) - 0.5) * np.pi
    psi = b * freq[:, None]
    gram = (psi * GRID.weights) @ psi.T
    np.testing.assert_allclose(gram, np.eye(20), atol=2e-3)
    assert not b.flags.writeable


def test_contamination_zero_is_bitwise_clean():
    clean = ProcessSpec.sbm(GRID)
    np.testing.assert_array_equal(sample_contaminated(ContaminationSpec(clean, 0.0), 50, 4).values,
                                  sample_process(clean, 50, 4).values)
    np.testing.assert_array_equal(sample(ContaminationSpec(clean, 0.0), 5, 4).values,
                                  sample(clean, 5, 4).values)


def test_full_contamination_variance():
    v = sample_contaminated(ContaminationSpec(ProcessSpec.sbm(GRID), 1.0), 10_000, 25).values
    want = 16 * (1.0 - truncation_variance(1.0, 250))
    assert abs(pointwise_var(v, 1.0) - want) < 3 * want * np.sqrt(2 / 10_000)


def test_mixture_variance():
    v = sample_contaminated(ContaminationSpec(ProcessSpec.sbm(GRID), 0.25), 20_000, 26).values
    want = 4.75 * (0.5 - truncation_variance(0.5, 250))
    # Mixture fourth moment: 3 t^2 (0.75 + 0.25 * 256).
    sd = np.sqrt(3 * 0.25 * (0.75 + 0.25 * 256) - (4.75 * 0.5) ** 2)
    assert abs(pointwise_var(v, 0.5) - want) < 3 * sd / np.sqrt(20_000)


def test_fixed_count():
    spec = ContaminationSpec(ProcessSpec.sbm(GRID), 0.25, fixed_count=True)
    for seed in range(5):
        _, flag = draw_mixture(spec, 20, seed)
        assert flag.sum() == 5


def test_nested_contamination_sets():
    clean = ProcessSpec.sbm(GRID)
    _, lo = draw_mixture(ContaminationSpec(clean, 0.05), 200, 8)
    _, hi = draw_mixture(ContaminationSpec(clean, 0.25), 200, 8)
    assert np.all(hi[lo])


def test_shift_outliers_switch():
    clean = ProcessSpec.sbm(GRID)
    shift = make_shift(ShiftSpec("eta2", 0.8), GRID)
    base, flag = draw_mixture(ContaminationSpec(clean, 0.5), 40, 9)
    assert 0 < flag.sum() < 40
    only_clean = sample_contaminated(ContaminationSpec(clean, 0.5), 40, 9, shift=shift).values
    np.testing.assert_array_equal(only_clean[flag], base[flag])
    np.testing.assert_allclose(only_clean[~flag], base[~flag] + shift.values)
    everyone = sample_contaminated(ContaminationSpec(clean, 0.5, shift_outliers=True), 40, 9,
                                   shift=shift).values
    np.testing.assert_allclose(everyone, base + shift.values)


def test_spec_validation():
    with pytest.raises(ValueError):
        ProcessSpec(GRID, "t")
    with pytest.raises(ValueError):
        ContaminationSpec(ProcessSpec.sbm(GRID), 1.5)
    with pytest.raises(ValueError):
        ShiftSpec("eta1", -1.0)
    with pytest.raises(ValueError):
        ShiftSpec("custom", 1.0)
    with pytest.raises(ValueError):
        sample_process(ProcessSpec.sbm(GRID), 0, 1)


def test_make_shift_examples():
    assert np.all(make_shift(ShiftSpec("eta1", 0.0), GRID).values == 0)
    g = make_grid(0, 1, 3)
    assert make_shift(ShiftSpec("eta3", 1.0), g).values[1] == pytest.approx(0.25)
    np.testing.assert_allclose(make_shift(ShiftSpec("eta2", 0.8), GRID).values, 0.8 * GRID.points)
    shape = Curve(g, np.array([1.0, -1.0, 2.0]))
    np.testing.assert_allclose(make_shift(ShiftSpec("custom", 2.0, shape), g).values, [2, -2, 4])


def test_apply_shift_examples():
    s = sample_process(ProcessSpec.sbm(GRID), 10, 3)
    np.testing.assert_array_equal(apply_shift(s, Curve.zeros(GRID)).values, s.values)
    d = make_shift(ShiftSpec("eta2", 0.8), GRID)
    back = apply_shift(apply_shift(s, d), -d)
    # x + d - d is exact only up to one rounding per entry.
    np.testing.assert_allclose(back.values, s.values, rtol=0, atol=1e-12)
    np.testing.assert_allclose(apply_shift(s, d).mean().values, s.mean().values + d.values, atol=1e-12)


@given(st.integers(0, 2**31), st.integers(1, 30), st.sampled_from(["sbm", "t"]))
def test_seed_determinism(seed, n, kind):
    spec = ProcessSpec(make_grid(0, 1, 20), kind, 4 if kind == "t" else None, 10)
    np.testing.assert_array_equal(sample_process(spec, n, seed).values, sample_process(spec, n, seed).values)


def test_null_symmetry():
    # Symmetric about zero: mean curve of many draws is near zero everywhere.
    v = sample_process(ProcessSpec.t(GRID, 5), 20_000, 27).values
    se = np.sqrt(5 / 3 * GRID.points[1:]) / np.sqrt(20_000)
    assert np.all(np.abs(v.mean(axis=0)[1:]) < 4.5 * se)

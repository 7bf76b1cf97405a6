"""Local (shrinking-shift) alternatives and asymptotic power.

Under ``W_i`` symmetric about ``eta / sqrt(n)``, ``sqrt(n) T_S`` and
``sqrt(n) T_SR`` are asymptotically Gaussian with drifts given by the mean
derivative of the sign map applied to ``eta``. In L2 that derivative at
``u`` is ``H_u(eta) = (eta - <S_u, eta> S_u) / |u|``. The sample drifts are

* sign:        ``mean_i H_{W_i}(eta)``
* signed rank: ``mean_{i<j} 2 H_{W_i + W_j}(eta)``

the second being the derivative at zero of ``t -> mean_{i<j} S(2 t eta + W_i + W_j)``.
Squared norms of the limits are noncentral weighted chi-square variables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateError
from .fspace import Curve, PairedDiffSample, check_same_grid, norm, row_norms
from .meantests import MeanTestConfig, select_L
from .nulldist import CalibrationConfig, WeightedChiSq, power_estimate, quantile, wchisq_draws
from .pairs import pair_terms
from .procsim import ShiftSpec
from .specops import Spectrum, pi1_hat, pi2_hat, sigma_hat, spectrum


class TestKind(str, enum.Enum):
    TS = "TS"
    TSR = "TSR"
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"

    __test__ = False


SIGN_TESTS = (TestKind.TS, TestKind.TSR)
MEAN_TESTS = (TestKind.T1, TestKind.T2, TestKind.T3)


def hessian_at(u: Curve, eta: Curve) -> Curve:
    """Derivative of ``x -> x / |x|`` at ``u`` in direction ``eta``."""
    check_same_grid(u.grid, eta.grid)
    r = norm(u)
    if r == 0:
        raise DegenerateError("the sign map is not differentiable at zero")
    if u.grid.size == 1:
        # One-dimensional: the sign map is locally constant.
        return Curve.zeros(u.grid)
    s = u.values / r
    w = u.grid.weights
    return Curve(u.grid, (eta.values - np.dot(w * s, eta.values) * s) / r)


def j1_hat(sample: PairedDiffSample, eta: Curve) -> Curve:
    """Sample drift of the sign statistic: average Hessian at each ``W_i``."""
    check_same_grid(sample.grid, eta.grid)
    v = sample.values
    w = sample.grid.weights
    d = row_norms(v, w)
    if np.any(d == 0):
        raise DegenerateError("a zero difference curve has no Hessian")
    if sample.grid.size == 1:
        return Curve.zeros(sample.grid)
    s = v / d[:, None]
    proj = s @ (w * eta.values)
    h = eta.values * np.mean(1.0 / d) - ((proj / d) @ s) / sample.n
    return Curve(sample.grid, h)


def j2_hat(sample: PairedDiffSample, eta: Curve, method: str = "auto") -> Curve:
    """Sample drift of the signed-rank statistic."""
    check_same_grid(sample.grid, eta.grid)
    n = sample.n
    if n < 2:
        raise DegenerateError("need at least two curves")
    terms = pair_terms(sample.values, sample.grid.weights, eta.values, method=method)
    if terms.zero_pairs:
        raise DegenerateError(f"{terms.zero_pairs} pair sums are exactly zero")
    if sample.grid.size == 1:
        return Curve.zeros(sample.grid)
    return Curve(sample.grid, 4.0 * terms.hessian_sum / (n * (n - 1)))


@dataclass(frozen=True, eq=False)
class AsymptoticPowerPoint:
    shift: ShiftSpec
    test: TestKind
    power: float
    replicates: int
    critical_value: float = float("nan")
    residual_drift: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.shift.family.value,
            "c": self.shift.c,
            "test": self.test.value,
            "power": self.power,
            "replicates": self.replicates,
            "critical_value": self.critical_value,
            "residual_drift": self.residual_drift,
            **self.extra,
        }


class NullModel:
    """Spectra of the estimated operators from one (large) null sample.

    The spectra and critical values are computed on first use and cached,
    so a whole power curve costs one pass over the sample.
    """

    def __init__(self, sample: PairedDiffSample, calib: CalibrationConfig | None = None):
        self.sample = sample
        self.calib = calib or CalibrationConfig()
        self._crit: dict = {}

    @cached_property
    def pi1(self) -> Spectrum:
        return self._nonempty(spectrum(pi1_hat(self.sample), self.calib.drop_tol))

    @cached_property
    def pi2(self) -> Spectrum:
        return self._nonempty(spectrum(pi2_hat(self.sample), self.calib.drop_tol))

    @cached_property
    def sigma(self) -> Spectrum:
        return self._nonempty(spectrum(sigma_hat(self.sample), self.calib.drop_tol))

    @staticmethod
    def _nonempty(spec: Spectrum) -> Spectrum:
        if len(spec) == 0:
            raise DegenerateError("null distribution degenerate")
        return spec

    def null_weights(self, test: TestKind, L: int | None = None) -> np.ndarray:
        test = TestKind(test)
        if test is TestKind.TS:
            return self.pi1.eigenvalues
        if test is TestKind.TSR:
            return self.pi2.eigenvalues
        if test is TestKind.T1:
            return self.sigma.eigenvalues
        if test is TestKind.T2:
            return self.sigma.eigenvalues[:L]
        return np.ones(L)

    def null_draws(self, test: TestKind, L: int | None = None) -> np.ndarray:
        """Central draws for ``test``, generated once per (test, L)."""
        test = TestKind(test)
        key = (test, L if test in (TestKind.T2, TestKind.T3) else None)
        if key not in self._crit:
            idx = list(TestKind).index(test)
            draws = wchisq_draws(WeightedChiSq(tuple(self.null_weights(test, L))),
                                 self.calib.mc_draws, self.calib.seed, 10 + idx, key[1] or 0)
            self._crit[key] = draws
        return self._crit[key]

    def critical_value(self, test: TestKind, alpha: float, L: int | None = None) -> float:
        return quantile(self.null_draws(test, L), 1 - alpha)

    def drift(self, test: TestKind, eta: Curve) -> Curve:
        test = TestKind(test)
        if test is TestKind.TS:
            return j1_hat(self.sample, eta)
        if test is TestKind.TSR:
            return j2_hat(self.sample, eta)
        return eta


def _alternative(spec: Spectrum, drift: Curve, L: int | None = None, standardize: bool = False,
                 keep_residual: bool = True) -> tuple[WeightedChiSq, float]:
    lam = spec.eigenvalues if L is None else spec.eigenvalues[:L]
    beta = spec.projections(drift)[: lam.size]
    residual = max(norm(drift) ** 2 - float(np.sum(beta**2)), 0.0) if keep_residual else 0.0
    weights = np.ones(lam.size) if standardize else lam
    delta = beta**2 / lam
    return WeightedChiSq(tuple(weights), tuple(delta), residual), residual


def asymp_power_signtests(kind: TestKind | str, null_sample, eta: Curve, alpha: float = 0.05,
                          calib: CalibrationConfig | None = None, shift: ShiftSpec | None = None,
                          key: tuple = ()) -> AsymptoticPowerPoint:
    """Asymptotic power of the sign or signed-rank test against ``eta / sqrt(n)``.

    ``null_sample`` may be a ``PairedDiffSample`` or a prepared ``NullModel``.
    """
    kind = TestKind(kind)
    if kind not in SIGN_TESTS:
        raise ValueError(f"{kind} is not a sign-type test")
    model = null_sample if isinstance(null_sample, NullModel) else NullModel(null_sample, calib)
    calib = model.calib
    crit = model.critical_value(kind, alpha)
    spec = model.pi1 if kind is TestKind.TS else model.pi2
    alt, residual = _alternative(spec, model.drift(kind, eta))
    power = power_estimate(alt, crit, calib.mc_draws, calib.seed, 20, *key)
    shift = shift or ShiftSpec("custom", 1.0, eta)
    return AsymptoticPowerPoint(shift, kind, power, calib.mc_draws, crit, residual)


def asymp_power_meantests(kind: TestKind | str, null_sample, eta: Curve, alpha: float = 0.05,
                          config: MeanTestConfig | None = None, calib: CalibrationConfig | None = None,
                          shift: ShiftSpec | None = None, key: tuple = ()) -> AsymptoticPowerPoint:
    """Asymptotic power of T1, T2 or T3: noncentral weighted chi-square with
    ``beta_k = <eta, psi_k>`` on the spectrum of the sample covariance."""
    kind = TestKind(kind)
    if kind not in MEAN_TESTS:
        raise ValueError(f"{kind} is not a mean-based test")
    config = config or MeanTestConfig(alpha=alpha)
    model = null_sample if isinstance(null_sample, NullModel) else NullModel(null_sample, calib)
    calib = model.calib
    spec = model.sigma
    extra = {}
    if kind is TestKind.T1:
        crit = model.critical_value(kind, alpha)
        alt, residual = _alternative(spec, eta)
    else:
        L = select_L(spec, config)
        extra["L"] = L
        crit = model.critical_value(kind, alpha, L)
        # Components beyond L do not enter T2 or T3.
        alt, residual = _alternative(spec, eta, L, standardize=kind is TestKind.T3,
                                     keep_residual=False)
    power = power_estimate(alt, crit, calib.mc_draws, calib.seed, 20, *key)
    shift = shift or ShiftSpec("custom", 1.0, eta)
    return AsymptoticPowerPoint(shift, kind, power, calib.mc_draws, crit, residual, extra)


def asymp_power(kind, model: NullModel, eta: Curve, alpha: float = 0.05,
                config: MeanTestConfig | None = None, shift: ShiftSpec | None = None,
                key: tuple = ()) -> AsymptoticPowerPoint:
    kind = TestKind(kind)
    if kind in SIGN_TESTS:
        return asymp_power_signtests(kind, model, eta, alpha, shift=shift, key=key)
    return asymp_power_meantests(kind, model, eta, alpha, config, shift=shift, key=key)

"""Spatial signs, the spatial sign and signed-rank statistics, and the tests
built on them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError
from .fspace import Curve, PairedDiffSample, norm
from .nulldist import CalibrationConfig, calibrate
from .pairs import pair_terms
from .specops import pi1_hat, pi2_factors, sign_rows, FactoredOperator, spectrum


class Kind(str, enum.Enum):
    SIGN = "sign"
    SIGNED_RANK = "signed_rank"


def spatial_sign(f: Curve) -> Curve:
    """``f / |f|``, or the zero curve when ``f`` is exactly zero."""
    r = norm(f)
    if r == 0:
        return Curve.zeros(f.grid)
    return Curve(f.grid, f.values / r)


def lp_spatial_sign(f: Curve, p: float) -> Curve:
    """Representer of the derivative of the L_p norm at ``f``.

    ``sign(f) |f|^(p-1) / |f|_p^(p-1)``; it has unit norm in L_q,
    ``q = p / (p - 1)``.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    r = norm(f, p)
    if r == 0:
        return Curve.zeros(f.grid)
    return Curve(f.grid, np.sign(f.values) * (np.abs(f.values) / r) ** (p - 1))


@dataclass(frozen=True, eq=False)
class SignStatistic:
    statistic_curve: Curve
    stat_norm: float
    n: int
    kind: Kind


def t_s(sample: PairedDiffSample) -> SignStatistic:
    """Average spatial sign of the difference curves."""
    s = sign_rows(sample.values, sample.grid.weights)
    curve = Curve(sample.grid, s.sum(axis=0) / sample.n)
    return SignStatistic(curve, norm(curve), sample.n, Kind.SIGN)


def t_sr(sample: PairedDiffSample, method: str = "auto") -> SignStatistic:
    """Average spatial sign of the pair sums ``W_i + W_j`` over ``i < j``."""
    n = sample.n
    if n < 2:
        raise DegenerateError("the signed-rank statistic needs at least two curves")
    rows = pair_terms(sample.values, sample.grid.weights, method=method).rowsums
    # Each unordered pair appears in two row sums.
    curve = Curve(sample.grid, rows.sum(axis=0) / (n * (n - 1)))
    return SignStatistic(curve, norm(curve), n, Kind.SIGNED_RANK)


@dataclass(frozen=True)
class TestReport:
    """Outcome of one calibrated test.

    ``statistic`` and ``critical_value`` are on the squared scale
    ``n * |T|^2``; the ``*_norm`` fields give the square roots.
    """

    test: str
    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    eigenvalues_used: tuple
    mc_draws: int
    seed: int
    extra: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical_value

    @property
    def statistic_norm(self) -> float:
        return float(np.sqrt(self.statistic))

    @property
    def critical_value_norm(self) -> float:
        return float(np.sqrt(self.critical_value))

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "statistic_norm": self.statistic_norm,
            "critical_value": self.critical_value,
            "critical_value_norm": self.critical_value_norm,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "eigenvalues_used": list(self.eigenvalues_used),
            "mc_draws": self.mc_draws,
            "seed": self.seed,
            **self.extra,
        }


def _report(test, stat, op: FactoredOperator, alpha, calib, key, extra=None) -> TestReport:
    spec = spectrum(op, calib.drop_tol)
    if len(spec) == 0:
        raise DegenerateError("null distribution degenerate")
    cal = calibrate(spec.eigenvalues, alpha, calib, *key)
    return TestReport(
        test=test,
        statistic=float(stat),
        critical_value=cal.critical_value,
        p_value=cal.pvalue(stat),
        alpha=alpha,
        eigenvalues_used=tuple(float(x) for x in spec.eigenvalues),
        mc_draws=calib.mc_draws,
        seed=calib.seed,
        extra=extra or {},
    )


def _check(sample, alpha):
    if sample.n < 2:
        raise DegenerateError("null distribution degenerate: need at least two curves")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def sign_test(sample: PairedDiffSample, alpha: float = 0.05,
              calib: CalibrationConfig | None = None, key: tuple = (0,)) -> TestReport:
    """Spatial sign test calibrated by the weighted chi-square null.

    ``key`` selects the calibration stream under ``calib.seed``.
    """
    calib = calib or CalibrationConfig()
    _check(sample, alpha)
    ts = t_s(sample)
    return _report("TS", sample.n * ts.stat_norm**2, pi1_hat(sample), alpha, calib, key)


def signed_rank_test(sample: PairedDiffSample, alpha: float = 0.05,
                     calib: CalibrationConfig | None = None, key: tuple = (1,)) -> TestReport:
    """Spatial signed-rank test calibrated by the weighted chi-square null."""
    calib = calib or CalibrationConfig()
    _check(sample, alpha)
    rows, theta = pi2_factors(sample)
    op = FactoredOperator(sample.grid, rows - theta, 4.0 / (sample.n - 1))
    stat = sample.n * norm(Curve(sample.grid, theta)) ** 2
    return _report("TSR", stat, op, alpha, calib, key)

"""Mean-based competitors: squared norm of the mean difference (T1), its
projection on the leading principal components (T2), and the standardized
projection (T3)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError
from .fspace import PairedDiffSample, norm
from .nulldist import CalibrationConfig, calibrate
from .signstats import TestReport
from .specops import Spectrum, sigma_hat, spectrum


class MeanKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"


@dataclass(frozen=True)
class MeanTestConfig:
    variance_threshold: float = 0.85
    L_override: int | None = None
    alpha: float = 0.05

    def __post_init__(self):
        if not 0 < self.variance_threshold < 1:
            raise ValueError("variance_threshold must lie in (0, 1)")
        if self.L_override is not None and self.L_override < 1:
            raise ValueError("L_override must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def t1(sample: PairedDiffSample) -> float:
    return norm(sample.mean()) ** 2


def choose_L(spec: Spectrum, threshold: float) -> int:
    """Smallest L whose leading eigenvalues explain ``threshold`` of the total."""
    lam = np.asarray(spec.eigenvalues if isinstance(spec, Spectrum) else spec, dtype=float)
    total = lam.sum()
    if lam.size == 0 or not total > 0:
        raise DegenerateError("cumulative variance rule needs a nonzero spectrum")
    frac = np.cumsum(lam) / total
    # Relative slack so that exact boundary cases are inclusive.
    return int(np.argmax(frac >= threshold * (1 - 1e-12)) + 1)


def _projections(sample: PairedDiffSample, spec: Spectrum, L: int) -> np.ndarray:
    if L < 1 or L > len(spec):
        raise DegenerateError(f"L={L} exceeds the {len(spec)} available eigenpairs")
    return spec.projections(sample.mean())[:L]


def t2(sample: PairedDiffSample, spec: Spectrum, L: int) -> float:
    return float(np.sum(_projections(sample, spec, L) ** 2))


def t3(sample: PairedDiffSample, spec: Spectrum, L: int) -> float:
    proj = _projections(sample, spec, L)
    lam = spec.eigenvalues[:L]
    if np.any(lam <= 0):
        raise DegenerateError("standardization undefined: zero eigenvalue")
    return float(np.sum(proj**2 / lam))


def select_L(spec: Spectrum, config: MeanTestConfig) -> int:
    if config.L_override is not None:
        return min(config.L_override, len(spec))
    return choose_L(spec, config.variance_threshold)


def mean_test(kind: MeanKind | str, sample: PairedDiffSample, config: MeanTestConfig | None = None,
              calib: CalibrationConfig | None = None, key: tuple | None = None) -> TestReport:
    """Calibrated T1/T2/T3 test; the statistic is ``n * T``."""
    kind = MeanKind(kind)
    config = config or MeanTestConfig()
    calib = calib or CalibrationConfig()
    if sample.n < 2:
        raise DegenerateError("null distribution degenerate: need at least two curves")
    key = key if key is not None else (2 + list(MeanKind).index(kind),)
    spec = spectrum(sigma_hat(sample), calib.drop_tol)
    if len(spec) == 0:
        raise DegenerateError("null distribution degenerate")
    n = sample.n
    extra = {"variance_threshold": config.variance_threshold}
    if kind is MeanKind.T1:
        stat = n * t1(sample)
        weights = spec.eigenvalues
    else:
        L = select_L(spec, config)
        extra["L"] = L
        if kind is MeanKind.T2:
            stat = n * t2(sample, spec, L)
            weights = spec.eigenvalues[:L]
        else:
            stat = n * t3(sample, spec, L)
            weights = np.ones(L)
    cal = calibrate(weights, config.alpha, calib, *key)
    return TestReport(
        test=kind.value,
        statistic=float(stat),
        critical_value=cal.critical_value,
        p_value=cal.pvalue(stat),
        alpha=config.alpha,
        eigenvalues_used=tuple(float(x) for x in weights),
        mc_draws=calib.mc_draws,
        seed=calib.seed,
        extra=extra,
    )

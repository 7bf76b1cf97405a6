"""Weighted sums of independent one-degree-of-freedom chi-square variables.

The squared norm of a Gaussian element of a Hilbert space with mean ``mu``
and covariance with eigenpairs ``(lam_k, psi_k)`` is distributed as
``sum_k lam_k * (Z_k + sqrt(delta_k)) ** 2`` with ``delta_k = <mu, psi_k>**2 / lam_k``.
All tail probabilities and quantiles are obtained by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError
from .rng import stream

# Rows of standard normals generated per block; bounds memory for long spectra.
_CHUNK = 8192


@dataclass(frozen=True)
class CalibrationConfig:
    """Monte Carlo settings for calibrating a test."""

    mc_draws: int = 100_000
    seed: int = 0
    drop_tol: float = 1e-12

    def __post_init__(self):
        if self.mc_draws < 1000:
            raise ValueError(f"mc_draws must be >= 1000, got {self.mc_draws}")
        if self.drop_tol < 0:
            raise ValueError("drop_tol must be non-negative")


@dataclass(frozen=True)
class WeightedChiSq:
    """Law of ``offset + sum_k weights[k] * chi2_1(noncentrality[k])``.

    ``offset`` is a deterministic shift. It carries drift mass that lies
    outside the span of the retained eigenfunctions.
    """

    weights: tuple
    noncentrality: tuple = ()
    offset: float = 0.0

    def __post_init__(self):
        w = tuple(float(x) for x in np.atleast_1d(np.asarray(self.weights, dtype=float)))
        nc = tuple(float(x) for x in np.atleast_1d(np.asarray(self.noncentrality, dtype=float)))
        if nc and len(nc) != len(w):
            raise ValueError("noncentrality must match weights in length")
        if any(not math.isfinite(x) or x <= 0 for x in w):
            raise ValueError("weights must be positive and finite")
        if any(not math.isfinite(x) or x < 0 for x in nc):
            raise ValueError("noncentrality must be non-negative and finite")
        if not math.isfinite(self.offset) or self.offset < 0:
            raise ValueError("offset must be non-negative and finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "noncentrality", nc)

    @classmethod
    def from_drift(cls, weights, projections, offset: float = 0.0) -> "WeightedChiSq":
        """Build from eigenvalues and drift projections ``beta_k = <mu, psi_k>``."""
        weights = np.asarray(weights, dtype=float)
        beta = np.asarray(projections, dtype=float)
        if weights.shape != beta.shape:
            raise ValueError("need one projection per weight")
        null = weights <= 0
        if np.any(beta[null] != 0):
            raise DegenerateError("drift has a component along a zero eigenvalue")
        weights, beta = weights[~null], beta[~null]
        return cls(tuple(weights), tuple(beta**2 / weights), offset)

    @property
    def size(self) -> int:
        return len(self.weights)

    def mean(self) -> float:
        lam = np.asarray(self.weights)
        return float(np.sum(lam * (1 + self._delta())) + self.offset)

    def variance(self) -> float:
        lam = np.asarray(self.weights)
        return float(2 * np.sum(lam**2 * (1 + 2 * self._delta())))

    def _delta(self) -> np.ndarray:
        if self.noncentrality:
            return np.asarray(self.noncentrality)
        return np.zeros(self.size)


def wchisq_draws(dist: WeightedChiSq, mc_draws: int, seed: int, *key: int) -> np.ndarray:
    """``mc_draws`` independent realizations of ``dist``.

    Deterministic in ``(seed, key)``. The normal stream does not depend on the
    weights, so rescaling the weights by ``c`` rescales every draw by ``c``.
    """
    if dist.size == 0:
        raise DegenerateError("null distribution degenerate: no positive weights")
    if mc_draws < 1:
        raise ValueError("mc_draws must be positive")
    lam = np.asarray(dist.weights)
    shift = np.sqrt(np.asarray(dist.noncentrality)) if dist.noncentrality else None
    rng = stream(seed, *key)
    out = np.empty(mc_draws)
    for start in range(0, mc_draws, _CHUNK):
        stop = min(start + _CHUNK, mc_draws)
        z = rng.standard_normal((stop - start, lam.size))
        if shift is not None:
            z += shift
        out[start:stop] = (z * z) @ lam
    if dist.offset:
        out += dist.offset
    return out


def quantile(draws: np.ndarray, level: float) -> float:
    """Order-statistic quantile: the ``ceil(level * N)``-th smallest draw."""
    draws = np.asarray(draws, dtype=float)
    if draws.size == 0:
        raise ValueError("quantile of an empty draw set")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    n = draws.size
    # Guard against level * N landing a hair above an integer.
    k = max(1, math.ceil(level * n - 1e-9))
    return float(np.partition(draws, k - 1)[k - 1])


def pvalue(draws: np.ndarray, observed: float) -> float:
    """Monte Carlo p-value ``(1 + #{draw >= observed}) / (1 + N)``."""
    draws = np.asarray(draws, dtype=float)
    if draws.size == 0:
        raise ValueError("p-value against an empty draw set")
    return float((1 + np.count_nonzero(draws >= observed)) / (1 + draws.size))


def power_estimate(dist_alt: WeightedChiSq, crit: float, mc_draws: int, seed: int, *key: int) -> float:
    """Fraction of draws from ``dist_alt`` that exceed ``crit``."""
    if crit < 0:
        raise ValueError("critical value must be non-negative")
    draws = wchisq_draws(dist_alt, mc_draws, seed, *key)
    return float(np.mean(draws > crit))


@dataclass(frozen=True)
class Calibration:
    """A calibrated null: critical value at ``1 - alpha`` plus the draws."""

    critical_value: float
    draws: np.ndarray = field(repr=False)
    weights: tuple = ()

    def pvalue(self, observed: float) -> float:
        return pvalue(self.draws, observed)


def calibrate(weights, alpha: float, calib: CalibrationConfig, *key: int) -> Calibration:
    """Central weighted chi-square null for the given weights at level ``alpha``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    weights = tuple(float(x) for x in weights)
    if not weights:
        raise DegenerateError("null distribution degenerate: no positive weights")
    draws = wchisq_draws(WeightedChiSq(weights), calib.mc_draws, calib.seed, *key)
    return Calibration(quantile(draws, 1 - alpha), draws, weights)

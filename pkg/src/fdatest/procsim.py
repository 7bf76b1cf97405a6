"""Karhunen-Loeve simulation of Brownian motion and t processes on [0, 1],
contamination mixtures, and location shifts.

A curve is ``sum_k sqrt(2) / ((k - 0.5) pi) * Z_k * sin((k - 0.5) pi t)``.
Brownian motion takes ``Z_k`` i.i.d. N(0, 1); the t process with ``nu``
degrees of freedom divides all ``Z_k`` of one curve by a single
``sqrt(V / nu)``, ``V ~ chi2(nu)``. Curve ``i`` draws from its own stream
``(seed, i)``, so a sample of size 100 is a prefix of one of size 1000.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fspace import Curve, Grid, PairedDiffSample, check_same_grid
from .rng import stream


class ProcessKind(str, enum.Enum):
    SBM = "sbm"
    T = "t"


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    grid: Grid
    kind: ProcessKind = ProcessKind.SBM
    nu: int | None = None
    kl_terms: int | None = None  # None means one term per grid point

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if self.kind is ProcessKind.T and (self.nu is None or self.nu < 1):
            raise ValueError("a t process needs nu >= 1")
        if self.kl_terms is not None and self.kl_terms < 1:
            raise ValueError("kl_terms must be >= 1")

    @property
    def terms(self) -> int:
        return self.kl_terms or self.grid.size

    @classmethod
    def sbm(cls, grid: Grid, kl_terms: int | None = None) -> "ProcessSpec":
        return cls(grid, ProcessKind.SBM, None, kl_terms)

    @classmethod
    def t(cls, grid: Grid, nu: int, kl_terms: int | None = None) -> "ProcessSpec":
        return cls(grid, ProcessKind.T, nu, kl_terms)


@dataclass(frozen=True, eq=False)
class ContaminationSpec:
    """Mixture ``(1 - epsilon) P + epsilon Q`` with ``Q = contaminant_scale * P``.

    With ``fixed_count`` the number of contaminated curves is exactly
    ``round(epsilon * n)`` instead of Binomial(n, epsilon). Under a location
    alternative the clean component is shifted; ``shift_outliers`` decides
    whether the contaminating component is shifted as well.
    """

    clean: ProcessSpec
    epsilon: float = 0.0
    contaminant_scale: float = 4.0
    fixed_count: bool = False
    shift_outliers: bool = False

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if not self.contaminant_scale > 0:
            raise ValueError("contaminant_scale must be positive")

    @property
    def grid(self) -> Grid:
        return self.clean.grid


@lru_cache(maxsize=16)
def _basis_cached(points: bytes, terms: int) -> np.ndarray:
    t = np.frombuffer(points)
    freq = (np.arange(1, terms + 1) - 0.5) * np.pi
    basis = np.sqrt(2.0) * np.sin(np.outer(freq, t)) / freq[:, None]
    basis.setflags(write=False)
    return basis


def kl_basis(grid: Grid, terms: int) -> np.ndarray:
    """``(terms, m)`` array: row k is ``sqrt(2) sin((k - 0.5) pi t) / ((k - 0.5) pi)``."""
    return _basis_cached(grid.points.tobytes(), int(terms))


def truncation_variance(t: float, terms: int) -> float:
    """Variance at ``t`` lost by truncating the Brownian expansion at ``terms``."""
    k = np.arange(terms + 1, terms + 200_000)
    freq = (k - 0.5) * np.pi
    return float(np.sum(2 * np.sin(freq * t) ** 2 / freq**2))


def _scores(spec: ProcessSpec, n: int, seed: int, start: int) -> tuple[np.ndarray, list]:
    K = spec.terms
    z = np.empty((n, K))
    gens = []
    for row in range(n):
        gen = stream(seed, start + row)
        z[row] = gen.standard_normal(K)
        if spec.kind is ProcessKind.T:
            z[row] /= np.sqrt(gen.chisquare(spec.nu) / spec.nu)
        gens.append(gen)
    return z, gens


def _synthesize(z: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # One product per curve: a batched matmul may block rows differently for
    # different n, which would break the bitwise prefix property.
    out = np.empty((z.shape[0], basis.shape[1]))
    for i, row in enumerate(z):
        out[i] = row @ basis
    return out


def sample_process(spec: ProcessSpec, n: int, seed: int, start: int = 0) -> PairedDiffSample:
    """``n`` curves; curve ``i`` uses stream ``(seed, start + i)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z, _ = _scores(spec, n, seed, start)
    return PairedDiffSample(spec.grid, _synthesize(z, kl_basis(spec.grid, spec.terms)))


def draw_mixture(spec: ContaminationSpec, n: int, seed: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Curve values and the boolean mask of contaminated curves.

    Each curve's membership draw comes after its scores on the same stream,
    so ``epsilon = 0`` reproduces ``sample_process`` bit for bit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z, gens = _scores(spec.clean, n, seed, start)
    u = np.array([g.random() for g in gens])
    if spec.fixed_count:
        k = int(round(spec.epsilon * n))
        flag = np.zeros(n, dtype=bool)
        flag[np.argsort(u, kind="stable")[:k]] = True
    else:
        flag = u < spec.epsilon
    values = _synthesize(z, kl_basis(spec.grid, spec.clean.terms))
    if np.any(flag):
        values[flag] *= spec.contaminant_scale
    return values, flag


def sample_contaminated(spec: ContaminationSpec, n: int, seed: int, start: int = 0,
                        shift: Curve | None = None) -> PairedDiffSample:
    """Curves from the contamination mixture.

    With ``shift`` the clean curves are translated by it; contaminating
    curves are translated too only if ``spec.shift_outliers``.
    """
    values, flag = draw_mixture(spec, n, seed, start)
    if shift is not None:
        values = shift_values(values, flag, shift, spec)
    return PairedDiffSample(spec.grid, values)


def shift_values(values: np.ndarray, flag: np.ndarray, shift: Curve,
                 spec: ContaminationSpec) -> np.ndarray:
    check_same_grid(spec.grid, shift.grid)
    if spec.shift_outliers:
        return values + shift.values
    return values + np.where(flag[:, None], 0.0, shift.values[None, :])


def sample(spec, n: int, seed: int, start: int = 0) -> PairedDiffSample:
    if isinstance(spec, ContaminationSpec):
        return sample_contaminated(spec, n, seed, start)
    return sample_process(spec, n, seed, start)


class ShiftFamily(str, enum.Enum):
    ETA1 = "eta1"  # c
    ETA2 = "eta2"  # c t
    ETA3 = "eta3"  # c t (1 - t)
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class ShiftSpec:
    family: ShiftFamily
    c: float = 0.0
    curve: Curve | None = None  # shape of a custom shift, scaled by c

    def __post_init__(self):
        object.__setattr__(self, "family", ShiftFamily(self.family))
        if self.c < 0:
            raise ValueError("shift magnitude c must be non-negative")
        if self.family is ShiftFamily.CUSTOM and self.curve is None:
            raise ValueError("a custom shift needs a curve")


def make_shift(spec: ShiftSpec, grid: Grid) -> Curve:
    t = grid.points
    if spec.family is ShiftFamily.ETA1:
        values = np.full_like(t, spec.c)
    elif spec.family is ShiftFamily.ETA2:
        values = spec.c * t
    elif spec.family is ShiftFamily.ETA3:
        values = spec.c * t * (1 - t)
    else:
        check_same_grid(grid, spec.curve.grid)
        values = spec.c * spec.curve.values
    return Curve(grid, values)


def apply_shift(sample: PairedDiffSample, shift: Curve) -> PairedDiffSample:
    check_same_grid(sample.grid, shift.grid)
    return PairedDiffSample(sample.grid, sample.values + shift.values)

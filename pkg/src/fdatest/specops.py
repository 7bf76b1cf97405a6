"""Low-rank covariance operators and their spectra.

An operator ``A = gamma * sum_k u_k (x) u_k`` is kept as its factor curves.
Its nonzero spectrum is read off the r x r Gram matrix
``G_jk = gamma * <u_j, u_k>``: if ``G c = lam c`` then ``sum_j c_j u_j`` is an
eigenfunction of ``A`` with eigenvalue ``lam``. When there are more factors
than grid points the m x m symmetrized matrix ``D^1/2 C D^1/2`` is smaller
and is used instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputFormatError
from .fspace import Curve, Grid, PairedDiffSample, check_same_grid, row_norms
from .pairs import pair_terms


@dataclass(frozen=True, eq=False)
class FactoredOperator:
    grid: Grid
    factors: np.ndarray  # (r, m)
    coefficient: float

    def __post_init__(self):
        factors = np.array(self.factors, dtype=float, ndmin=2)
        if factors.shape[1] != self.grid.size:
            raise InputFormatError("factor curves do not match the grid")
        if not self.coefficient > 0:
            raise InputFormatError("operator coefficient must be positive")
        factors.setflags(write=False)
        object.__setattr__(self, "factors", factors)

    @property
    def rank_bound(self) -> int:
        return self.factors.shape[0]

    def trace(self) -> float:
        return float(self.coefficient * np.sum(row_norms(self.factors, self.grid.weights) ** 2))

    def quadratic(self, f: Curve) -> float:
        """``<f, A f>``."""
        check_same_grid(self.grid, f.grid)
        proj = self.factors @ (self.grid.weights * f.values)
        return float(self.coefficient * proj @ proj)


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: Grid
    eigenvalues: np.ndarray  # nonincreasing, positive
    eigenfunctions: np.ndarray  # (K, m), orthonormal under the grid weights
    dropped_below: float = 0.0

    def __len__(self) -> int:
        return self.eigenvalues.size

    def total(self) -> float:
        return float(np.sum(self.eigenvalues))

    def curve(self, k: int) -> Curve:
        return Curve(self.grid, self.eigenfunctions[k])

    def projections(self, f: Curve) -> np.ndarray:
        """Coefficients ``<f, psi_k>`` for every retained eigenfunction."""
        check_same_grid(self.grid, f.grid)
        return self.eigenfunctions @ (self.grid.weights * f.values)


def apply(op: FactoredOperator, f: Curve) -> Curve:
    """``A f = gamma * sum_k <u_k, f> u_k``."""
    check_same_grid(op.grid, f.grid)
    proj = op.factors @ (op.grid.weights * f.values)
    return Curve(op.grid, op.coefficient * (proj @ op.factors))


def _need_two(sample: PairedDiffSample) -> None:
    if sample.n < 2:
        raise DegenerateError(f"need at least two curves, got {sample.n}")


def sign_rows(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Spatial signs of each row; zero rows map to zero."""
    d = row_norms(values, weights)
    out = np.zeros_like(values, dtype=float)
    nz = d > 0
    out[nz] = values[nz] / d[nz, None]
    return out


def pi1_hat(sample: PairedDiffSample) -> FactoredOperator:
    """Covariance estimate of the spatial signs, centred at their mean."""
    _need_two(sample)
    s = sign_rows(sample.values, sample.grid.weights)
    return FactoredOperator(sample.grid, s - s.mean(axis=0), 1.0 / (sample.n - 1))


def pi2_factors(sample: PairedDiffSample, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Per-curve averaged pair signs ``(n-1)^-1 sum_{j != i} S(W_i + W_j)``
    and their mean, which is the signed-rank statistic."""
    n = sample.n
    rows = pair_terms(sample.values, sample.grid.weights, method=method).rowsums / (n - 1)
    theta = rows.sum(axis=0) / n
    return rows, theta


def pi2_hat(sample: PairedDiffSample, method: str = "auto") -> FactoredOperator:
    """Covariance estimate of the averaged pair signs, scaled by 4."""
    _need_two(sample)
    rows, theta = pi2_factors(sample, method)
    return FactoredOperator(sample.grid, rows - theta, 4.0 / (sample.n - 1))


def sigma_hat(sample: PairedDiffSample) -> FactoredOperator:
    """Sample covariance operator of the difference curves."""
    _need_two(sample)
    v = sample.values
    return FactoredOperator(sample.grid, v - v.mean(axis=0), 1.0 / (sample.n - 1))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coordinate of each row positive."""
    if vecs.size == 0:
        return vecs
    pick = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(vecs.shape[0]), pick])
    signs[signs == 0] = 1.0
    return vecs * signs[:, None]


def spectrum(op: FactoredOperator, drop_tol: float = 1e-12) -> Spectrum:
    """Nonzero eigenpairs of ``op``; eigenvalues below ``drop_tol * lam_1`` are dropped."""
    w = op.grid.weights
    u = op.factors
    r, m = u.shape
    if r <= m:
        gram = op.coefficient * ((u * w) @ u.T)
        gram = 0.5 * (gram + gram.T)
        lam, vec = np.linalg.eigh(gram)
        lam, vec = lam[::-1], vec[:, ::-1]
        keep = _kept(lam, drop_tol)
        lam, vec = lam[keep], vec[:, keep]
        funcs = vec.T @ u
        funcs /= row_norms(funcs, w)[:, None]
    else:
        root = np.sqrt(w)
        b = u * root
        mat = op.coefficient * (b.T @ b)
        lam, vec = np.linalg.eigh(0.5 * (mat + mat.T))
        lam, vec = lam[::-1], vec[:, ::-1]
        keep = _kept(lam, drop_tol)
        lam, vec = lam[keep], vec[:, keep]
        funcs = vec.T / root
    threshold = drop_tol * lam[0] if lam.size else 0.0
    return Spectrum(op.grid, lam.copy(), _fix_signs(funcs), threshold)


def _kept(lam: np.ndarray, drop_tol: float) -> np.ndarray:
    if lam.size == 0 or not lam[0] > 0:
        return np.zeros(lam.size, dtype=bool)
    return lam > max(drop_tol * lam[0], 0.0)

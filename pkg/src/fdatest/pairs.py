"""Pairwise spatial-sign kernels over all ``i != j`` pair sums ``W_i + W_j``.

Two routes compute the same quantities:

* ``explicit`` forms every pair sum. Exact-zero sums contribute nothing and
  sums of +-1 signs stay exact, which matters for univariate checks.
* ``gram`` reads pair norms off the Gram matrix and assembles the row sums
  with matrix products, O(n^2 m) through BLAS instead of an n^2-long Python
  loop. Pairs that nearly cancel are flagged and redone explicitly.

``auto`` picks ``explicit`` while the number of pair-sum entries is small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fspace import row_norms

EXPLICIT_BUDGET = 5_000_000
_BLOCK = 512
# Pairs with |W_i + W_j|^2 below this fraction of |W_i|^2 + |W_j|^2 are
# recomputed from the explicit sum to avoid cancellation in the Gram formula.
_CANCEL = 1e-6


@dataclass(frozen=True)
class PairTerms:
    """``rowsums[i] = sum_{j != i} S(W_i + W_j)`` and, if requested,
    ``hessian_sum = sum_{i < j} H(W_i + W_j)(eta)``."""

    rowsums: np.ndarray
    hessian_sum: np.ndarray | None = None
    zero_pairs: int = 0


def _choose(n: int, m: int, method: str) -> str:
    if method == "auto":
        return "explicit" if n * (n - 1) // 2 * m <= EXPLICIT_BUDGET else "gram"
    if method not in ("explicit", "gram"):
        raise ValueError(f"unknown pair method {method!r}")
    return method


def pair_terms(values: np.ndarray, weights: np.ndarray, eta: np.ndarray | None = None,
               method: str = "auto") -> PairTerms:
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    if _choose(n, m, method) == "explicit":
        return _explicit(values, weights, eta)
    return _gram(values, weights, eta)


def _explicit(values, weights, eta):
    n, m = values.shape
    rowsums = np.zeros((n, m))
    hess = np.zeros(m) if eta is not None else None
    weta = weights * eta if eta is not None else None
    zero = 0
    for i in range(n - 1):
        x = values[i] + values[i + 1:]
        d = row_norms(x, weights)
        nz = d > 0
        zero += int(nz.size - np.count_nonzero(nz))
        s = np.zeros_like(x)
        s[nz] = x[nz] / d[nz, None]
        rowsums[i] += s.sum(axis=0)
        rowsums[i + 1:] += s
        if eta is not None and np.any(nz):
            proj = s[nz] @ weta
            dn = d[nz]
            hess += eta * np.sum(1.0 / dn) - (proj / dn) @ s[nz]
    return PairTerms(rowsums, hess, zero)


def _gram(values, weights, eta):
    n, m = values.shape
    sq = np.einsum("ij,ij->i", values * weights, values)
    wv = values * weights
    a = wv @ eta if eta is not None else None
    rowsums = np.empty((n, m))
    coef_h = np.zeros(n) if eta is not None else None
    inv_total = 0.0
    flagged = []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        idx = np.arange(start, stop)
        d2 = sq[idx, None] + sq[None, :] + 2.0 * (wv[idx] @ values.T)
        scale = sq[idx, None] + sq[None, :]
        bad = d2 < _CANCEL * scale
        bad[idx - start, idx] = False
        inv = np.zeros_like(d2)
        ok = ~bad
        ok[idx - start, idx] = False
        inv[ok] = 1.0 / np.sqrt(d2[ok])
        rowsums[idx] = inv.sum(axis=1)[:, None] * values[idx] + inv @ values
        if eta is not None:
            e = np.zeros_like(d2)
            e[ok] = (a[idx, None] + a[None, :])[ok] * inv[ok] ** 3
            coef_h[idx] = e.sum(axis=1)
            inv_total += inv.sum()
        bi, bj = np.nonzero(bad)
        flagged.extend((int(i + start), int(j)) for i, j in zip(bi, bj) if i + start < j)
    hess = None
    if eta is not None:
        hess = 0.5 * inv_total * eta - coef_h @ values
    # Near-cancelling pairs skipped above, added back from explicit sums.
    weta = weights * eta if eta is not None else None
    zero = 0
    for i, j in flagged:
        x = values[i] + values[j]
        d = float(np.sqrt(np.dot(x * weights, x)))
        if d == 0:
            zero += 1
            continue
        s = x / d
        rowsums[i] += s
        rowsums[j] += s
        if eta is not None:
            hess += (eta - np.dot(s, weta) * s) / d
    return PairTerms(rowsums, hess, zero)

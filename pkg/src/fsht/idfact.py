"""Interpolative decompositions ``A ~ A[:, skeleton] @ interp``.

The interpolation matrix holds a ``k x k`` identity on the skeleton
columns, so only the coefficients of the redundant columns are stored and
the identity is applied as a permutation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "InterpDecomp",
    "id_fixed_precision",
    "id_fixed_rank",
    "id_apply",
    "id_apply_transpose",
]

log = logging.getLogger(__name__)

# The optimal ID keeps coefficients within 2; pivoted QR may exceed that mildly.
INTERP_WARN = 10.0


@dataclass(frozen=True)
class InterpDecomp:
    """Column skeleton plus interpolation coefficients of an ``m x n`` matrix.

    Attributes
    ----------
    skeleton : (k,) int array
        Columns of the source matrix kept in ``A_CS``.
    redundant : (n-k,) int array
        The remaining columns, in pivot order.
    coeffs : (k, n-k) array
        Interpolation coefficients of the redundant columns.
    """

    skeleton: np.ndarray
    redundant: np.ndarray
    coeffs: np.ndarray

    @property
    def k(self) -> int:
        return len(self.skeleton)

    @property
    def n(self) -> int:
        return len(self.skeleton) + len(self.redundant)

    @property
    def interp(self) -> np.ndarray:
        """The full ``k x n`` interpolation matrix."""
        P = np.zeros((self.k, self.n))
        P[np.arange(self.k), self.skeleton] = 1.0
        P[:, self.redundant] = self.coeffs
        return P

    def interp_apply(self, v: np.ndarray) -> np.ndarray:
        return v[self.skeleton] + self.coeffs @ v[self.redundant]

    def interp_apply_transpose(self, w: np.ndarray) -> np.ndarray:
        out = np.empty((self.n,) + w.shape[1:], dtype=np.result_type(w, self.coeffs))
        out[self.skeleton] = w
        out[self.redundant] = self.coeffs.T @ w
        return out

    def flops(self, ncols: int = 1) -> int:
        """Multiply-add count of one interpolation apply, times two."""
        return 2 * self.coeffs.size * ncols


def _finish(R: np.ndarray, perm: np.ndarray, k: int, n: int) -> InterpDecomp:
    skeleton = perm[:k].copy()
    redundant = perm[k:].copy()
    if k == 0:
        return InterpDecomp(skeleton, redundant, np.zeros((0, n)))
    if k == n:
        return InterpDecomp(skeleton, redundant, np.zeros((k, 0)))
    # C order, matching deserialized plans so applies agree bit for bit
    coeffs = np.ascontiguousarray(scipy.linalg.solve_triangular(R[:k, :k], R[:k, k:n]))
    big = np.abs(coeffs).max(initial=0.0)
    if big > INTERP_WARN:
        log.debug("interpolation coefficient %.3g exceeds %.1f", big, INTERP_WARN)
    return InterpDecomp(skeleton, redundant, coeffs)


def _pivoted_r(A: np.ndarray):
    R, perm = scipy.linalg.qr(A, mode="r", pivoting=True, check_finite=False)
    return R, perm


def numerical_rank(diag: np.ndarray, tol: float, scale: float) -> int:
    """Smallest ``k`` with ``|R_kk| <= tol * scale * |R_00|``."""
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    small = np.nonzero(diag <= tol * scale * diag[0])[0]
    return int(small[0]) if small.size else diag.size


def id_fixed_precision(A: np.ndarray, tol: float) -> InterpDecomp:
    """ID whose rank is set by the decay of the pivoted triangular factor.

    The threshold is ``tol * max(m, n)`` relative to the leading diagonal
    entry, so blocks are compressed relative to their own size.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if m == 0 or n == 0:
        return InterpDecomp(np.zeros(0, np.int64), np.arange(n, dtype=np.int64),
                            np.zeros((0, n)))
    R, perm = _pivoted_r(A)
    k = numerical_rank(np.abs(np.diag(R)), tol, max(m, n))
    return _finish(R, perm.astype(np.int64), k, n)


def id_fixed_rank(A: np.ndarray, k: int) -> InterpDecomp:
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if not 0 <= k <= min(m, n):
        raise ValueError(f"rank must lie in [0, {min(m, n)}], got {k}")
    if k == 0:
        return InterpDecomp(np.zeros(0, np.int64), np.arange(n, dtype=np.int64),
                            np.zeros((0, n)))
    R, perm = _pivoted_r(A)
    return _finish(R, perm.astype(np.int64), k, n)


def _columns(d: InterpDecomp, source_columns) -> np.ndarray:
    return source_columns(d.skeleton) if callable(source_columns) else source_columns


def id_apply(d: InterpDecomp, source_columns, v: np.ndarray) -> np.ndarray:
    """``A_CS (A_I v)``.  ``source_columns`` is the ``m x k`` skeleton block,
    or a callable returning it from the skeleton indices."""
    return _columns(d, source_columns) @ d.interp_apply(np.asarray(v))


def id_apply_transpose(d: InterpDecomp, source_columns, v: np.ndarray) -> np.ndarray:
    """``A_I^T (A_CS^T v)``."""
    return d.interp_apply_transpose(_columns(d, source_columns).T @ np.asarray(v))

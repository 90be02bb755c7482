"""Givens-rotation representation of the order-lowering connection matrices.

``C^(m)`` maps coefficients of normalized associated Legendre functions of
order ``m+2`` (degrees ``m+2 .. N``) to those of order ``m`` (degrees
``m .. N``).  With ``n+1 = N-m-1`` source columns it is ``(n+3) x (n+1)``
with orthonormal columns and equals

    C^(m) = G_0 G_1 ... G_n I_{(n+3) x (n+1)}

where ``G_j`` rotates rows ``j`` and ``j+2`` by the analytically known
sine ``s_j^m`` and cosine ``c_j^m``.  The rotations nearest the rectangular
identity act first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np

__all__ = [
    "EXACT_LIMIT",
    "RotationParams",
    "LayerRotations",
    "RotationTable",
    "rotation_params",
    "layer_rotations",
    "connection_entry",
    "connection_matrix",
    "dense_layer_matrix",
    "apply_layer",
    "apply_layer_transpose",
    "lower_order_chain",
    "chain_matrix",
    "right_multiply_layer",
]

# Integers up to 2**53 convert to binary64 without loss.
EXACT_LIMIT = 2**53


@dataclass(frozen=True)
class RotationParams:
    s: float
    c: float


def _check_exact(j: int, m: int) -> None:
    if j < 0 or m < 0:
        raise ValueError(f"rotation index and order must be non-negative, got j={j}, m={m}")
    if (j + 2 * m + 3) * (j + 2 * m + 4) > EXACT_LIMIT:
        raise OverflowError(
            f"rotation ({j}, {m}) exceeds the exact integer range of binary64"
        )


def rotation_params(j: int, m: int) -> RotationParams:
    """Sine and cosine of rotation ``j`` in layer ``m``.

    Numerators and denominators are exact integers, so each value carries
    one rounding from the division and one from the square root.
    """
    j, m = int(j), int(m)
    _check_exact(j, m)
    den = float((j + 2 * m + 3) * (j + 2 * m + 4))
    s = math.sqrt(float((j + 1) * (j + 2)) / den)
    c = math.sqrt(float((2 * m + 2) * (2 * j + 2 * m + 5)) / den)
    return RotationParams(s, c)


@dataclass(frozen=True)
class LayerRotations:
    """Rotation parameters of one layer, indexed by rotation ``j``."""

    m: int
    s: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.s)

    @property
    def params(self) -> list[RotationParams]:
        return [RotationParams(float(s), float(c)) for s, c in zip(self.s, self.c)]


def layer_rotations(m: int, count: int) -> LayerRotations:
    """Vectorized :func:`rotation_params` for ``j = 0 .. count-1``."""
    if count > 0:
        _check_exact(count - 1, m)
    j = np.arange(count, dtype=np.int64)
    m64 = np.int64(m)
    den = ((j + 2 * m64 + 3) * (j + 2 * m64 + 4)).astype(np.float64)
    s = np.sqrt(((j + 1) * (j + 2)).astype(np.float64) / den)
    c = np.sqrt(((2 * m64 + 2) * (2 * j + 2 * m64 + 5)).astype(np.float64) / den)
    return LayerRotations(m, s, c)


class RotationTable:
    """Rotation parameters for every layer of a bandlimit-``n`` transform.

    With ``cached=True`` the sines and cosines of all layers are stored
    (``O(n^2)`` floats); otherwise the kernels regenerate them from the
    integer formulas as they go.
    """

    def __init__(self, n: int, cached: bool = True):
        if n < 0:
            raise ValueError(f"bandlimit must be non-negative, got {n}")
        self.n = n
        self.cached = cached
        layers = max(n - 1, 0)
        if layers:
            # largest j + 2m used is 2n - 4, at j = 0 in the last layer
            _check_exact(0, layers - 1)
        if cached and layers:
            self.S = np.zeros((layers, layers))
            self.C = np.zeros((layers, layers))
            for m in range(layers):
                lr = layer_rotations(m, n - m - 1)
                self.S[m, : lr.count] = lr.s
                self.C[m, : lr.count] = lr.c
        else:
            self.S = np.zeros((0, 0))
            self.C = np.zeros((0, 0))

    @property
    def nbytes(self) -> int:
        return self.S.nbytes + self.C.nbytes

    def chain_down(self, W: np.ndarray, abs_m: np.ndarray, target: np.ndarray) -> None:
        """In place: re-expand column ``k`` of ``W`` from order ``abs_m[k]`` to
        order ``target[k]`` (same parity, ``target <= abs_m``)."""
        _chain_down(W, _as_i64(abs_m), _as_i64(target), self.S, self.C, self.cached)

    def chain_up(self, W: np.ndarray, abs_m: np.ndarray, target: np.ndarray) -> None:
        """In place: least-squares lift of column ``k`` from order ``target[k]``
        back to order ``abs_m[k]``; trailing entries are zeroed."""
        _chain_up(W, _as_i64(abs_m), _as_i64(target), self.S, self.C, self.cached)


def _as_i64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


@numba.njit(cache=True, inline="always")
def _sc(S, C, cached, m, j):
    if cached:
        return S[m, j], C[m, j]
    den = float((j + 2 * m + 3) * (j + 2 * m + 4))
    s = math.sqrt(float((j + 1) * (j + 2)) / den)
    c = math.sqrt(float((2 * m + 2) * (2 * j + 2 * m + 5)) / den)
    return s, c


@numba.njit(cache=True)
def _rotate_down(w, s, c, count):
    for j in range(count - 1, -1, -1):
        a = w[j]
        b = w[j + 2]
        w[j] = c[j] * a + s[j] * b
        w[j + 2] = c[j] * b - s[j] * a


@numba.njit(cache=True)
def _rotate_up(w, s, c, count):
    for j in range(count):
        a = w[j]
        b = w[j + 2]
        w[j] = c[j] * a - s[j] * b
        w[j + 2] = s[j] * a + c[j] * b


@numba.njit(cache=True, parallel=True)
def _chain_down(W, abs_m, target, S, C, cached):
    N = W.shape[0] - 1
    for k in numba.prange(W.shape[1]):
        for m in range(abs_m[k] - 2, target[k] - 1, -2):
            for j in range(N - m - 2, -1, -1):
                s, c = _sc(S, C, cached, m, j)
                a = W[j, k]
                b = W[j + 2, k]
                W[j, k] = c * a + s * b
                W[j + 2, k] = c * b - s * a


@numba.njit(cache=True, parallel=True)
def _chain_up(W, abs_m, target, S, C, cached):
    N = W.shape[0] - 1
    for k in numba.prange(W.shape[1]):
        for m in range(target[k], abs_m[k] - 1, 2):
            for j in range(N - m - 1):
                s, c = _sc(S, C, cached, m, j)
                a = W[j, k]
                b = W[j + 2, k]
                W[j, k] = c * a - s * b
                W[j + 2, k] = s * a + c * b
            W[N - m - 1, k] = 0.0
            W[N - m, k] = 0.0


@numba.njit(cache=True)
def _right_multiply(A, s, c, count):
    rows = A.shape[0]
    for j in range(count):
        for i in range(rows):
            a = A[i, j]
            b = A[i, j + 2]
            A[i, j] = c[j] * a - s[j] * b
            A[i, j + 2] = s[j] * a + c[j] * b


def _product_ratio(top: int, bottom: int, k: int, extra: int) -> float:
    """prod_{i=1}^{k} (top+i) / prod_{i=1}^{k+extra} (bottom+i), in floats."""
    r = 1.0
    for i in range(1, k + 1):
        r *= (top + i) / (bottom + i)
    for i in range(k + 1, k + extra + 1):
        r /= bottom + i
    return r


def connection_entry(l: int, q: int, m: int) -> float:
    """Closed-form connection coefficient between degree offsets ``l`` (order
    ``m``) and ``q`` (order ``m+2``).

    Entry ``(l, q)`` of ``C^(m)``: the coefficient of
    ``P~_{l+m}^m`` in the expansion of ``P~_{q+m+2}^{m+2}``.
    """
    if l < 0 or q < 0 or m < 0:
        raise ValueError("indices must be non-negative")
    if l == q + 2:
        return -math.sqrt((q + 1) * (q + 2) / ((q + 2 * m + 3) * (q + 2 * m + 4)))
    if l > q or (l + q) % 2:
        return 0.0
    if q + 2 * m + 4 <= 20:
        ratio = Fraction(
            math.factorial(l + 2 * m) * (2 * q + 2 * m + 5) * math.factorial(q),
            (2 * l + 2 * m + 1) * math.factorial(l) * math.factorial(q + 2 * m + 4),
        )
        return (2 * l + 2 * m + 1) * (2 * m + 2) * math.sqrt(ratio)
    # (l+2m)!/l! * q!/(q+2m+4)! as a product of ratios below one
    ratio = _product_ratio(l, q, 2 * m, 4)
    ratio *= (q + m + 2.5) / (l + m + 0.5)
    return (2 * l + 2 * m + 1) * (2 * m + 2) * math.sqrt(ratio)


def connection_matrix(n: int, m: int) -> np.ndarray:
    """``C^(m)`` of shape ``(n+3, n+1)`` assembled entrywise from the closed
    form; the independent check on the rotation product."""
    l = np.arange(n + 3, dtype=np.float64)[:, None]
    q = np.arange(n + 1, dtype=np.float64)[None, :]
    ratio = np.ones((n + 3, n + 1))
    for i in range(1, 2 * m + 1):
        ratio *= (l + i) / (q + i)
    for i in range(2 * m + 1, 2 * m + 5):
        ratio /= q + i
    ratio *= (q + m + 2.5) / (l + m + 0.5)
    upper = (2 * l + 2 * m + 1) * (2 * m + 2) * np.sqrt(ratio)
    li = np.arange(n + 3)[:, None]
    qi = np.arange(n + 1)[None, :]
    out = np.where((li <= qi) & ((li + qi) % 2 == 0), upper, 0.0)
    q1 = np.arange(n + 1)
    out[q1 + 2, q1] = -np.sqrt((q1 + 1.0) * (q1 + 2.0) / ((q1 + 2 * m + 3.0) * (q1 + 2 * m + 4.0)))
    return out


def dense_layer_matrix(n: int, m: int) -> np.ndarray:
    """Materialize ``C^(m)`` (``(n+3) x (n+1)``) from its rotations."""
    A = np.zeros((n + 3, n + 1), order="F")
    A[np.arange(n + 1), np.arange(n + 1)] = 1.0
    lr = layer_rotations(m, n + 1)
    for k in range(n + 1):
        _rotate_down(A[:, k], lr.s, lr.c, n + 1)
    return A


def apply_layer(m: int, v: np.ndarray) -> np.ndarray:
    """``C^(m) v`` for ``v`` of length ``n+1``; returns length ``n+3``."""
    v = np.asarray(v, dtype=np.float64)
    count = v.shape[0]
    w = np.zeros(count + 2)
    w[:count] = v
    lr = layer_rotations(m, count)
    _rotate_down(w, lr.s, lr.c, count)
    return w


def apply_layer_transpose(m: int, v: np.ndarray) -> np.ndarray:
    """``C^(m)^T v`` for ``v`` of length ``n+3``; returns length ``n+1``."""
    w = np.array(v, dtype=np.float64)
    count = w.shape[0] - 2
    if count < 1:
        raise ValueError("need a vector of length at least 3")
    lr = layer_rotations(m, count)
    _rotate_up(w, lr.s, lr.c, count)
    return w[:count].copy()


def lower_order_chain(abs_m: int, parity_target: int, v: np.ndarray,
                      direction: str = "down") -> np.ndarray:
    """Convert between orders ``abs_m`` and ``parity_target`` (``abs_m mod 2``).

    ``down`` takes order-``abs_m`` coefficients (degrees ``abs_m..N``) to
    order ``parity_target``; ``up`` applies the transposed chain, the
    least-squares inverse.
    """
    if abs_m < 2 or parity_target != abs_m % 2:
        raise ValueError("need abs_m >= 2 and parity_target == abs_m % 2")
    v = np.asarray(v, dtype=np.float64)
    empty = np.zeros((0, 0))
    if direction == "down":
        N = v.shape[0] - 1 + abs_m
        _check_exact(max(N - parity_target - 2, 0), parity_target)
        w = np.zeros((N + 1, 1), order="F")
        w[: v.shape[0], 0] = v
        _chain_down(w, _as_i64([abs_m]), _as_i64([parity_target]), empty, empty, False)
        return w[: N + 1 - parity_target, 0].copy()
    if direction == "up":
        N = v.shape[0] - 1 + parity_target
        _check_exact(max(N - parity_target - 2, 0), parity_target)
        w = np.zeros((N + 1, 1), order="F")
        w[: v.shape[0], 0] = v
        _chain_up(w, _as_i64([abs_m]), _as_i64([parity_target]), empty, empty, False)
        return w[: N + 1 - abs_m, 0].copy()
    raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")


def chain_matrix(N: int, M: int, parity: int | None = None) -> np.ndarray:
    """Dense ``C^(p) C^(p+2) ... C^(M-2)`` for bandlimit ``N`` (order ``M`` to
    order ``p = M mod 2``), shape ``(N+1-p) x (N+1-M)``."""
    p = M % 2 if parity is None else parity
    A = np.zeros((N + 1 - p, N + 1 - p), order="F")
    A[np.arange(N + 1 - p), np.arange(N + 1 - p)] = 1.0
    for m in range(p, M, 2):
        A = right_multiply_layer(A, m, N)
    return A


def right_multiply_layer(A: np.ndarray, m: int, N: int) -> np.ndarray:
    """``A C^(m)`` for ``A`` with ``N+1-m`` columns; returns ``N-m-1`` columns."""
    count = N - m - 1
    if A.shape[1] != count + 2:
        raise ValueError(f"expected {count + 2} columns, got {A.shape[1]}")
    A = np.asfortranarray(A)
    if count <= 0:
        return np.zeros((A.shape[0], 0), order="F")
    lr = layer_rotations(m, count)
    _right_multiply(A, lr.s, lr.c, count)
    return A[:, :count]

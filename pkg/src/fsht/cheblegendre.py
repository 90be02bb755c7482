"""Order-0 Legendre <-> cosine and order-1 Legendre <-> sine conversions.

Each conversion matrix is upper triangular with a chessboard of zeros, and
its entries factor as ``row_scale[l] * kernel(l, n) * col_scale[n]`` where
the kernel is a product of two Lambda values divided by simple factors.
After a parity shuffle, each half is an upper-triangular matrix whose
blocks well separated from the diagonal are interpolated in the row index
by a degree-``k`` Chebyshev polynomial in barycentric form.
"""
from __future__ import annotations

import enum
import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .coeffs import parity_shuffle, parity_unshuffle
from .lambda_fn import lam

__all__ = [
    "KernelKind",
    "BarycentricGrid",
    "DenseLeaf",
    "LowRank",
    "HodlrPlan",
    "interp_degree",
    "kernel_entry",
    "dense_matrix",
    "dense_convert",
    "build_hodlr",
    "hodlr_apply",
    "barycentric_matrix",
    "keiner_bound",
    "lemma_4f3_check",
    "RHO",
]

RHO = 3.0 + math.sqrt(8.0)
KEINER_M = 2.0 * math.sqrt(2.0) * math.exp(5.0 / 3.0) / math.pi
SQRT_PI = math.sqrt(math.pi)


class KernelKind(enum.IntEnum):
    LEG0_TO_COS = 0
    COS_TO_LEG0 = 1
    LEG1_TO_SIN = 2
    SIN_TO_LEG1 = 3

    @property
    def inverse(self) -> "KernelKind":
        return KernelKind(self ^ 1)


def interp_degree(tol: float) -> int:
    """Chebyshev degree that resolves the kernel to ``tol`` on any
    well-separated square."""
    if not 0 < tol < 1:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    k = math.ceil(math.log(4 * math.sqrt(2) * math.exp(5 / 3)
                           / (math.pi * (1 + math.sqrt(2)) * tol)) / math.log(RHO))
    return max(k, 1)


def keiner_bound(k: int) -> float:
    """Sup-norm interpolation error bound ``4 M rho^-k / (rho - 1)``."""
    return 4 * KEINER_M * RHO ** (-k) / (RHO - 1)


@dataclass(frozen=True)
class BarycentricGrid:
    """Chebyshev points of the first kind and their barycentric weights."""

    k: int

    @property
    def points(self) -> np.ndarray:
        return np.cos((2 * np.arange(self.k + 1) + 1) * np.pi / (2 * self.k + 2))

    @property
    def weights(self) -> np.ndarray:
        l = np.arange(self.k + 1)
        return (-1.0) ** l * np.sin((2 * l + 1) * np.pi / (2 * self.k + 2))

    def nodes(self, a: float, b: float) -> np.ndarray:
        """Points mapped to ``[a, b]``."""
        return (a + b) / 2 + (b - a) * self.points / 2


def barycentric_matrix(grid: BarycentricGrid, a: float, b: float,
                       x: np.ndarray) -> np.ndarray:
    """Rows of interpolation weights: ``p(x_i) = W[i] @ samples``."""
    x = np.asarray(x, dtype=np.float64)
    t = grid.nodes(a, b)
    diff = x[:, None] - t[None, :]
    hit = diff == 0.0
    diff[hit] = 1.0
    W = grid.weights[None, :] / diff
    W /= W.sum(axis=1, keepdims=True)
    rows = np.nonzero(hit.any(axis=1))[0]
    for i in rows:
        W[i] = hit[i].astype(np.float64)
    return W


# -- kernels -------------------------------------------------------------
# x is the row (target) index, y the column (source) index, both in the
# original degree numbering; kernels are evaluated only for y - x >= 0 even
# (dense path) or on well-separated blocks (interpolation path).

def _kernel(kind: KernelKind, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind == KernelKind.LEG0_TO_COS:
        return (2 / np.pi) * lam((y - x) / 2) * lam((y + x) / 2)
    if kind == KernelKind.LEG1_TO_SIN:
        return (2 / np.pi) * lam((y - x) / 2) * lam((y + x + 2) / 2)
    if kind == KernelKind.COS_TO_LEG0:
        return lam((y - x - 2) / 2) * lam((y + x - 1) / 2) / ((y - x) * (y + x + 1))
    if kind == KernelKind.SIN_TO_LEG1:
        return lam((y - x) / 2) * lam((y + x + 3) / 2) / ((y - x - 1) * (y + x + 2))
    raise ValueError(kind)


def _kernel_diag(kind: KernelKind, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    if kind != KernelKind.COS_TO_LEG0:
        return _kernel(kind, n, n)
    # Lambda((d-2)/2)/d -> -sqrt(pi) as d -> 0; column 0 is cos(0) = sqrt(2) P_0
    out = np.empty_like(n)
    pos = n > 0
    out[pos] = -SQRT_PI * lam(n[pos] - 0.5) / (2 * n[pos] + 1)
    out[~pos] = 2.0
    return out


def row_scale(kind: KernelKind, size: int) -> np.ndarray:
    l = np.arange(size, dtype=np.float64)
    if kind == KernelKind.LEG0_TO_COS:
        return np.where(l == 0, 0.5, 1.0)
    if kind == KernelKind.COS_TO_LEG0:
        return np.sqrt(l + 0.5)
    if kind == KernelKind.LEG1_TO_SIN:
        return l + 1
    return np.sqrt((l + 1) * (l + 2) * (l + 1.5))


def col_scale(kind: KernelKind, size: int) -> np.ndarray:
    n = np.arange(size, dtype=np.float64)
    if kind == KernelKind.LEG0_TO_COS:
        return np.sqrt(n + 0.5)
    if kind == KernelKind.COS_TO_LEG0:
        return np.where(n == 0, 1.0, -n)
    if kind == KernelKind.LEG1_TO_SIN:
        return np.sqrt((n + 1.5) / ((n + 1) * (n + 2)))
    return -np.ones(size)


def kernel_entry(kind: KernelKind, row: int, col: int) -> float:
    """Coefficient of target basis function ``row`` in source function ``col``."""
    kind = KernelKind(kind)
    if row < 0 or col < row or (col - row) % 2:
        return 0.0
    rs = row_scale(kind, row + 1)[row]
    cs = col_scale(kind, col + 1)[col]
    if row == col:
        k = _kernel_diag(kind, np.array([float(col)]))[0]
    else:
        k = float(_kernel(kind, np.float64(row), np.float64(col)))
    return float(rs * k * cs)


def _kernel_block(kind: KernelKind, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Kernel on an integer grid, zero off the triangle/chessboard."""
    X = np.asarray(rows, dtype=np.float64)[:, None] + np.zeros(len(cols))[None, :]
    Y = np.asarray(cols, dtype=np.float64)[None, :] + np.zeros(len(rows))[:, None]
    d = Y - X
    out = np.zeros(X.shape)
    off = (d > 0) & (d % 2 == 0)
    if off.any():
        out[off] = _kernel(kind, X[off], Y[off])
    diag = d == 0
    if diag.any():
        out[diag] = _kernel_diag(kind, X[diag])
    return out


def dense_matrix(kind: KernelKind, n: int) -> np.ndarray:
    """Full ``(n+1) x (n+1)`` conversion matrix."""
    kind = KernelKind(kind)
    idx = np.arange(n + 1)
    K = _kernel_block(kind, idx, idx)
    return row_scale(kind, n + 1)[:, None] * K * col_scale(kind, n + 1)[None, :]


def dense_convert(kind: KernelKind, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return dense_matrix(kind, v.shape[0] - 1) @ v


# -- hierarchical plan ---------------------------------------------------

@dataclass
class DenseLeaf:
    parity: int
    r0: int
    r1: int
    c0: int
    c1: int
    entries: np.ndarray = field(repr=False)

    def flops(self) -> int:
        return 2 * self.entries.size


@dataclass
class LowRank:
    parity: int
    r0: int
    r1: int
    c0: int
    c1: int
    W: np.ndarray = field(repr=False)
    Ftilde: np.ndarray = field(repr=False)

    def flops(self) -> int:
        return 2 * (self.W.size + self.Ftilde.size)


@dataclass
class HodlrPlan:
    """Hierarchical partition of one conversion matrix.

    Block ranges index the parity-shuffled halves: row ``i`` of a block
    with parity ``p`` is degree ``2i + p``.
    """

    n: int
    kind: KernelKind
    k: int
    leaf: int
    blocks: list = field(repr=False)
    row_scale: np.ndarray = field(repr=False)
    col_scale: np.ndarray = field(repr=False)

    def apply_flops(self) -> int:
        return sum(b.flops() for b in self.blocks) + 2 * (self.n + 1)

    def dense_flops(self) -> int:
        """Two flops per structural nonzero of the triangular matrix."""
        n1 = self.n + 1
        nnz = sum((n1 - j + 1) // 2 for j in range(n1))
        return 2 * nnz

    # -- serialization -------------------------------------------------
    _HEAD = struct.Struct("<IQIII")
    _BLOCK = struct.Struct("<IIQQQQ")

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(self._HEAD.pack(int(self.kind), self.n, self.k, self.leaf, len(self.blocks)))
        for b in self.blocks:
            low = isinstance(b, LowRank)
            buf.write(self._BLOCK.pack(int(low), b.parity, b.r0, b.r1, b.c0, b.c1))
            if low:
                buf.write(np.ascontiguousarray(b.W, dtype="<f8").tobytes())
                buf.write(np.ascontiguousarray(b.Ftilde, dtype="<f8").tobytes())
            else:
                buf.write(np.ascontiguousarray(b.entries, dtype="<f8").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "HodlrPlan":
        kind, n, k, leaf, count = cls._HEAD.unpack_from(raw, 0)
        pos = cls._HEAD.size

        def array(shape):
            nonlocal pos
            size = 8 * shape[0] * shape[1]
            out = np.frombuffer(raw[pos:pos + size], dtype="<f8").astype(np.float64)
            pos += size
            return out.reshape(shape)

        blocks = []
        for _ in range(count):
            low, parity, r0, r1, c0, c1 = cls._BLOCK.unpack_from(raw, pos)
            pos += cls._BLOCK.size
            if low:
                W = array((r1 - r0, k + 1))
                F = array((k + 1, c1 - c0))
                blocks.append(LowRank(parity, r0, r1, c0, c1, W, F))
            else:
                blocks.append(DenseLeaf(parity, r0, r1, c0, c1, array((r1 - r0, c1 - c0))))
        if pos != len(raw):
            raise ValueError("trailing bytes after hierarchical plan")
        kind = KernelKind(kind)
        return cls(n, kind, k, leaf, blocks,
                   row_scale(kind, n + 1), col_scale(kind, n + 1))


def well_separated(r0: int, r1: int, c0: int, c1: int) -> bool:
    """Rows ``r0..r1-1`` and columns ``c0..c1-1`` lie in a square
    ``[x0, x0+c] x [y0, y0+c]`` with ``y0 - x0 >= 2c``."""
    c = max(r1 - r0, c1 - c0) - 1
    return c0 - r0 >= 2 * c


def _partition(kind, parity, k, leaf, r0, r1, c0, c1, grid, out):
    if r1 <= r0 or c1 <= c0 or c1 <= r0:
        return
    if well_separated(r0, r1, c0, c1) and r1 - r0 > k + 1:
        deg = lambda i: 2.0 * i + parity  # noqa: E731
        t = grid.nodes(r0, r1 - 1)
        cols = np.arange(c0, c1)
        Ftilde = _kernel(kind, deg(t)[:, None], deg(cols)[None, :].astype(np.float64))
        W = barycentric_matrix(grid, r0, r1 - 1, np.arange(r0, r1))
        out.append(LowRank(parity, r0, r1, c0, c1, W, Ftilde))
        return
    if max(r1 - r0, c1 - c0) <= leaf or well_separated(r0, r1, c0, c1):
        rows = 2 * np.arange(r0, r1) + parity
        cols = 2 * np.arange(c0, c1) + parity
        out.append(DenseLeaf(parity, r0, r1, c0, c1, _kernel_block(kind, rows, cols)))
        return
    rm = r0 + (r1 - r0 + 1) // 2
    cm = c0 + (c1 - c0 + 1) // 2
    for a, b in ((r0, rm), (rm, r1)):
        for c, d in ((c0, cm), (cm, c1)):
            _partition(kind, parity, k, leaf, a, b, c, d, grid, out)


def build_hodlr(kind: KernelKind, n: int, tol: float = 2.0**-52,
                leaf: int | None = None) -> HodlrPlan:
    """Hierarchical plan for the ``(n+1) x (n+1)`` conversion of ``kind``."""
    if n < 0:
        raise ValueError(f"size must be non-negative, got {n}")
    kind = KernelKind(kind)
    k = interp_degree(tol)
    leaf = max(2 * (k + 1), 32) if leaf is None else leaf
    grid = BarycentricGrid(k)
    blocks: list = []
    for parity in (0, 1):
        size = (n - parity) // 2 + 1 if n >= parity else 0
        _partition(kind, parity, k, leaf, 0, size, 0, size, grid, blocks)
    return HodlrPlan(n, kind, k, leaf, blocks, row_scale(kind, n + 1), col_scale(kind, n + 1))


def hodlr_apply(plan: HodlrPlan, v: np.ndarray) -> np.ndarray:
    """Apply the plan to a vector or to each column of a matrix."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != plan.n + 1:
        raise ValueError(f"expected leading dimension {plan.n + 1}, got {v.shape[0]}")
    cs = plan.col_scale.reshape((-1,) + (1,) * (v.ndim - 1))
    halves_in = parity_shuffle(cs * v)
    halves_out = [np.zeros_like(h) for h in halves_in]
    for b in plan.blocks:
        src = halves_in[b.parity][b.c0:b.c1]
        if isinstance(b, LowRank):
            halves_out[b.parity][b.r0:b.r1] += b.W @ (b.Ftilde @ src)
        else:
            halves_out[b.parity][b.r0:b.r1] += b.entries @ src
    rs = plan.row_scale.reshape((-1,) + (1,) * (v.ndim - 1))
    return rs * parity_unshuffle(*halves_out)


# -- identity probe ------------------------------------------------------

def _log_poch(a: float, j: int) -> float:
    return math.lgamma(a + j) - math.lgamma(a)


def lemma_4f3_check(l: int, m: int) -> tuple[float, float]:
    """Both sides of the closed-form summation identity behind the rank
    estimate, evaluated with log-gamma.

    The rising factorial ``(m)_j`` is taken as 1 at ``j = 0`` for every m,
    including ``m = 0``.
    """
    if l < 0 or m < 0:
        raise ValueError("l and m must be non-negative")
    lhs = 0.0
    for j in range(l // 2 + 1):
        if m == 0 and j > 0:
            continue
        logt = (math.lgamma(l + 2 * m - j + 0.5) - math.lgamma(l + m - j + 1.5)
                + (_log_poch(m, j) if j else 0.0) - math.lgamma(j + 1)
                + math.lgamma(l + 2 * m - 2 * j + 1) - math.lgamma(l - 2 * j + 1))
        lhs += (2 * m + 1 + 2 * l - 4 * j) * math.exp(logt)
    rhs = 2 * SQRT_PI * math.exp(math.lgamma(l + 4 * m + 1) - m * math.log(16)
                                 - math.lgamma(m + 0.5) - math.lgamma(l + 1))
    return lhs, rhs

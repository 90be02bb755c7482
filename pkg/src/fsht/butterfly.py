"""Multilevel butterfly factorization built from interpolative decompositions.

The columns of ``A`` start out in blocks of ``leaf_width``.  At each level,
adjacent column groups are merged and every row strip is split in half;
the merged skeleton columns restricted to each half are compressed by an
ID.  After ``L = ceil(log2(blocks))`` levels there is one column group per
row strip, and the surviving skeleton columns are stored densely.

Full-height leaf blocks are never compressed: for matrices with
orthonormal columns they have full rank, so level 1 starts directly with
the split rows.
"""
from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .idfact import InterpDecomp, id_fixed_precision

__all__ = [
    "ButterflyNode",
    "ButterflyFactorization",
    "RankStats",
    "butterfly_factor",
    "butterfly_apply",
    "butterfly_apply_transpose",
    "rank_statistics",
    "default_leaf_width",
]

EXPECTED_RANK = 16


def default_leaf_width(expected_rank: float = EXPECTED_RANK) -> int:
    return max(8, 2 * math.ceil(expected_rank))


@dataclass
class ButterflyNode:
    """ID of one (row strip, column group) block at a level >= 1."""

    level: int
    strip: int
    group: int
    r0: int
    r1: int
    k_left: int
    k_right: int
    id: InterpDecomp


@dataclass
class ButterflyFactorization:
    shape: tuple[int, int]
    leaf_width: int
    levels: int
    nodes: list[list[ButterflyNode]] = field(repr=False)
    # per final (strip, group): row range, skeleton column indices, dense block
    finals: list[tuple[int, int, int, int, np.ndarray, np.ndarray]] = field(repr=False)

    @property
    def leaf_ranges(self) -> list[tuple[int, int]]:
        n_c = self.shape[1]
        return [(c, min(c + self.leaf_width, n_c)) for c in range(0, n_c, self.leaf_width)]

    def ranks(self) -> list[tuple[int, int]]:
        return [(node.level, node.id.k) for lvl in self.nodes for node in lvl]

    def apply_flops(self, ncols: int = 1) -> int:
        """Floating-point operations of one forward (or transpose) apply."""
        flops = 0
        for lvl in self.nodes:
            for node in lvl:
                flops += (node.id.flops(1) + node.id.k) * ncols
        for (_, r0, r1, _, cols, B) in self.finals:
            flops += 2 * B.size * ncols
        return flops

    def dense_flops(self, ncols: int = 1) -> int:
        return 2 * self.shape[0] * self.shape[1] * ncols

    @property
    def nbytes(self) -> int:
        return len(self.to_bytes())

    def to_dense(self) -> np.ndarray:
        return butterfly_apply(self, np.eye(self.shape[1]))

    # -- serialization ---------------------------------------------------
    _HEAD = struct.Struct("<QQIII")
    _NODE = struct.Struct("<IQQIIII")
    _FINAL = struct.Struct("<IQQII")

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(self._HEAD.pack(self.shape[0], self.shape[1], self.leaf_width,
                                  self.levels, sum(len(l) for l in self.nodes)))
        for lvl in self.nodes:
            for nd in lvl:
                d = nd.id
                buf.write(self._NODE.pack(nd.level, nd.r0, nd.r1, nd.strip, nd.group,
                                          nd.k_left, nd.k_right))
                buf.write(struct.pack("<I", d.k))
                buf.write(d.skeleton.astype("<u4").tobytes())
                buf.write(d.redundant.astype("<u4").tobytes())
                buf.write(np.ascontiguousarray(d.coeffs, dtype="<f8").tobytes())
        buf.write(struct.pack("<I", len(self.finals)))
        for (strip, r0, r1, group, cols, B) in self.finals:
            buf.write(self._FINAL.pack(strip, r0, r1, group, len(cols)))
            buf.write(cols.astype("<u4").tobytes())
            buf.write(np.asfortranarray(B, dtype="<f8").tobytes(order="F"))
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ButterflyFactorization":
        view = memoryview(raw)
        pos = 0

        def take(fmt: struct.Struct):
            nonlocal pos
            out = fmt.unpack_from(view, pos)
            pos += fmt.size
            return out

        def array(count: int, dtype: str) -> np.ndarray:
            nonlocal pos
            size = np.dtype(dtype).itemsize * count
            out = np.frombuffer(view[pos:pos + size], dtype=dtype)
            pos += size
            return out

        u32 = struct.Struct("<I")
        n_r, n_c, leaf_width, levels, count = take(cls._HEAD)
        nodes: list[list[ButterflyNode]] = [[] for _ in range(levels)]
        for _ in range(count):
            level, r0, r1, strip, group, k_left, k_right = take(cls._NODE)
            (k,) = take(u32)
            n_in = k_left + k_right
            skel = array(k, "<u4").astype(np.int64)
            red = array(n_in - k, "<u4").astype(np.int64)
            coeffs = array(k * (n_in - k), "<f8").astype(np.float64).reshape(k, n_in - k)
            nodes[level - 1].append(ButterflyNode(level, strip, group, r0, r1, k_left,
                                                  k_right, InterpDecomp(skel, red, coeffs)))
        (nfinal,) = take(u32)
        finals = []
        for _ in range(nfinal):
            strip, r0, r1, group, k = take(cls._FINAL)
            cols = array(k, "<u4").astype(np.int64)
            B = array((r1 - r0) * k, "<f8").astype(np.float64).reshape((r1 - r0, k), order="F")
            finals.append((strip, r0, r1, group, cols, B))
        if pos != len(raw):
            raise ValueError("trailing bytes after butterfly factorization")
        return cls((n_r, n_c), leaf_width, levels, nodes, finals)


def _split_rows(ranges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for r0, r1 in ranges:
        mid = r0 + (r1 - r0 + 1) // 2
        out.extend([(r0, mid), (mid, r1)])
    return out


def butterfly_factor(A: np.ndarray, tol: float,
                     leaf_width: int | None = None) -> ButterflyFactorization:
    """Compress ``A`` so that products with ``A`` and ``A^T`` cost
    ``O(k^2/C n log n)`` instead of ``O(n^2)``."""
    A = np.asarray(A, dtype=np.float64)
    n_r, n_c = A.shape
    C = default_leaf_width() if leaf_width is None else int(leaf_width)
    if C < 1:
        raise ValueError("leaf width must be positive")
    nb = max(1, math.ceil(n_c / C))
    levels = math.ceil(math.log2(nb)) if nb > 1 else 0

    strips = [(0, n_r)]
    skel = [[np.arange(c, min(c + C, n_c)) for c in range(0, max(n_c, 1), C)]]
    ngroups = nb
    nodes: list[list[ButterflyNode]] = []
    for level in range(1, levels + 1):
        strips = _split_rows(strips)
        ngroups = (ngroups + 1) // 2
        new_skel = []
        lvl_nodes = []
        for r, (r0, r1) in enumerate(strips):
            parent = skel[r // 2]
            row_skel = []
            for g in range(ngroups):
                left = parent[2 * g]
                right = parent[2 * g + 1] if 2 * g + 1 < len(parent) else np.zeros(0, np.int64)
                cols = np.concatenate([left, right]).astype(np.int64)
                d = id_fixed_precision(A[r0:r1][:, cols], tol)
                lvl_nodes.append(ButterflyNode(level, r, g, r0, r1, len(left), len(right), d))
                row_skel.append(cols[d.skeleton])
            new_skel.append(row_skel)
        skel = new_skel
        nodes.append(lvl_nodes)

    finals = []
    for r, (r0, r1) in enumerate(strips):
        for g, cols in enumerate(skel[r]):
            finals.append((r, r0, r1, g, cols, np.asfortranarray(A[r0:r1][:, cols])))
    return ButterflyFactorization((n_r, n_c), C, levels, nodes, finals)


def butterfly_apply(f: ButterflyFactorization, v: np.ndarray) -> np.ndarray:
    """``A v`` for a vector or a matrix of column vectors."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != f.shape[1]:
        raise ValueError(f"expected leading dimension {f.shape[1]}, got {v.shape[0]}")
    z = {(0, b): v[c0:c1] for b, (c0, c1) in enumerate(f.leaf_ranges)}
    for lvl in f.nodes:
        znew = {}
        for nd in lvl:
            left = z[(nd.strip // 2, 2 * nd.group)]
            right = z.get((nd.strip // 2, 2 * nd.group + 1))
            inp = left if right is None else np.concatenate([left, right])
            znew[(nd.strip, nd.group)] = nd.id.interp_apply(inp)
        z = znew
    y = np.zeros((f.shape[0],) + v.shape[1:])
    for (strip, r0, r1, group, cols, B) in f.finals:
        if B.size:
            y[r0:r1] += B @ z[(strip, group)]
    return y


def butterfly_apply_transpose(f: ButterflyFactorization, w: np.ndarray) -> np.ndarray:
    """``A^T w`` for a vector or a matrix of column vectors."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[0] != f.shape[0]:
        raise ValueError(f"expected leading dimension {f.shape[0]}, got {w.shape[0]}")
    tail = w.shape[1:]
    z = {}
    for (strip, r0, r1, group, cols, B) in f.finals:
        z[(strip, group)] = B.T @ w[r0:r1]
    for lvl in reversed(f.nodes):
        zprev: dict = {}
        for nd in lvl:
            t = nd.id.interp_apply_transpose(z[(nd.strip, nd.group)])
            for key, part in (((nd.strip // 2, 2 * nd.group), t[: nd.k_left]),
                              ((nd.strip // 2, 2 * nd.group + 1), t[nd.k_left:])):
                if part.shape[0] == 0 and key not in zprev:
                    zprev[key] = np.zeros((0,) + tail)
                    continue
                if key in zprev and zprev[key].shape[0]:
                    zprev[key] = zprev[key] + part
                else:
                    zprev[key] = part
        z = zprev
    x = np.zeros((f.shape[1],) + tail)
    for b, (c0, c1) in enumerate(f.leaf_ranges):
        part = z.get((0, b))
        if part is not None and part.shape[0]:
            x[c0:c1] = part
    return x


@dataclass(frozen=True)
class RankStats:
    avg: float
    std: float
    max: int
    per_level: list[tuple[int, float]]


def rank_statistics(f) -> RankStats:
    """Mean, spread and maximum of the ID ranks over all levels.

    Accepts one factorization or an iterable of them.
    """
    fs = [f] if isinstance(f, ButterflyFactorization) else list(f)
    ranks = [rk for fac in fs for rk in fac.ranks()]
    if not ranks:
        return RankStats(0.0, 0.0, 0, [])
    levels = np.array([lv for lv, _ in ranks])
    ks = np.array([k for _, k in ranks], dtype=np.float64)
    per_level = [(int(lv), float(ks[levels == lv].mean())) for lv in np.unique(levels)]
    return RankStats(float(ks.mean()), float(ks.std()), int(ks.max()), per_level)

"""Coefficient array layout for bandlimited expansions on the sphere.

Coefficients of degree at most ``n`` are stored in an ``(n+1) x (2n+1)``
real array.  Column ``j`` holds the order

    m = 0, -1, +1, -2, +2, ...

so that ``|m| = ceil(j/2)``, and row ``i`` of a spherical harmonic column
holds degree ``|m| + i``.  The longitudinal basis attached to the columns is

    {1/sqrt(2), sin(phi), cos(phi), sin(2 phi), cos(2 phi), ...} / sqrt(pi)

i.e. negative orders pair with sines and positive orders with cosines.
Entries below the staircase are stored as explicit zeros.

For Fourier arrays the latitudinal basis is ``cos(l theta)`` in columns of
even ``|m|`` (rows ``0..n``) and ``sin((l+1) theta)`` in columns of odd
``|m|`` (rows ``0..n-1``).
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kind",
    "Parity",
    "ColumnOrder",
    "CoeffMatrix",
    "column_order",
    "column_of_order",
    "layout_index",
    "degree_of",
    "parity_shuffle",
    "parity_unshuffle",
    "normalize_columns",
    "save_coeffs",
    "load_coeffs",
    "save_csv",
    "load_csv",
    "COEFF_MAGIC",
    "COEFF_VERSION",
]

COEFF_MAGIC = b"FSHC"
COEFF_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


class Kind(enum.IntEnum):
    SPHERICAL_HARMONIC = 0
    FOURIER = 1


class Parity(enum.IntEnum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class ColumnOrder:
    j: int
    m: int
    abs_m: int
    parity: Parity


def column_order(j: int) -> ColumnOrder:
    """Decode column index ``j`` into its signed order."""
    if j < 0:
        raise ValueError(f"column index must be non-negative, got {j}")
    abs_m = (j + 1) // 2
    m = -abs_m if j % 2 else abs_m
    return ColumnOrder(j=j, m=m, abs_m=abs_m, parity=Parity(abs_m % 2))


def column_of_order(m: int) -> int:
    """Column index holding signed order ``m``."""
    return 2 * m if m >= 0 else -2 * m - 1


def layout_index(l: int, m: int, n: int) -> tuple[int, int]:
    """Array position ``(row, col)`` of the coefficient of degree l, order m."""
    if l < 0 or abs(m) > l or l > n:
        raise ValueError(f"need |m| <= l <= n, got l={l}, m={m}, n={n}")
    return l - abs(m), column_of_order(m)


def degree_of(row: int, col: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`layout_index`: ``(l, m)`` stored at ``(row, col)``."""
    order = column_order(col)
    l = order.abs_m + row
    if col > 2 * n or row < 0 or l > n:
        raise ValueError(f"({row}, {col}) lies outside the staircase for n={n}")
    return l, order.m


def _column_lengths(n: int, kind: Kind) -> np.ndarray:
    abs_m = (np.arange(2 * n + 1) + 1) // 2
    if kind == Kind.SPHERICAL_HARMONIC:
        return n + 1 - abs_m
    return n + 1 - abs_m % 2


@dataclass
class CoeffMatrix:
    """Real coefficients of a bandlimited expansion in the staircase layout."""

    n: int
    data: np.ndarray
    kind: Kind = Kind.SPHERICAL_HARMONIC

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"bandlimit must be non-negative, got {self.n}")
        self.kind = Kind(self.kind)
        data = np.asfortranarray(self.data, dtype=np.float64)
        if data.shape != (self.n + 1, 2 * self.n + 1):
            raise ValueError(
                f"expected shape {(self.n + 1, 2 * self.n + 1)}, got {data.shape}"
            )
        self.data = data

    @classmethod
    def zeros(cls, n: int, kind: Kind = Kind.SPHERICAL_HARMONIC) -> "CoeffMatrix":
        return cls(n, np.zeros((n + 1, 2 * n + 1), order="F"), kind)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator,
               kind: Kind = Kind.SPHERICAL_HARMONIC,
               normalize: bool = True) -> "CoeffMatrix":
        """Standard normal coefficients on the staircase, columns optionally
        normalized in l2."""
        F = cls(n, rng.standard_normal((n + 1, 2 * n + 1)), kind)
        F.data[~F.mask()] = 0.0
        return normalize_columns(F) if normalize else F

    def column_lengths(self) -> np.ndarray:
        """Number of structurally meaningful entries in each column."""
        return _column_lengths(self.n, self.kind)

    def mask(self) -> np.ndarray:
        """Boolean array marking the structurally meaningful entries."""
        rows = np.arange(self.n + 1)[:, None]
        return rows < self.column_lengths()[None, :]

    def copy(self) -> "CoeffMatrix":
        return CoeffMatrix(self.n, self.data.copy(order="F"), self.kind)

    def __getitem__(self, lm: tuple[int, int]) -> float:
        if self.kind != Kind.SPHERICAL_HARMONIC:
            raise TypeError("degree/order indexing applies to spherical harmonic arrays")
        return float(self.data[layout_index(lm[0], lm[1], self.n)])

    def __setitem__(self, lm: tuple[int, int], value: float) -> None:
        if self.kind != Kind.SPHERICAL_HARMONIC:
            raise TypeError("degree/order indexing applies to spherical harmonic arrays")
        self.data[layout_index(lm[0], lm[1], self.n)] = value


def parity_shuffle(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``v`` (along its first axis) into even- and odd-indexed entries."""
    v = np.asarray(v)
    return v[0::2].copy(), v[1::2].copy()


def parity_unshuffle(v_even: np.ndarray, v_odd: np.ndarray) -> np.ndarray:
    """Interleave the halves produced by :func:`parity_shuffle`."""
    v_even = np.asarray(v_even)
    v_odd = np.asarray(v_odd)
    if not 0 <= v_even.shape[0] - v_odd.shape[0] <= 1:
        raise ValueError("even half must have the same length as the odd half or one more")
    out = np.empty((v_even.shape[0] + v_odd.shape[0],) + v_even.shape[1:],
                   dtype=np.result_type(v_even, v_odd))
    out[0::2] = v_even
    out[1::2] = v_odd
    return out


def normalize_columns(F: CoeffMatrix) -> CoeffMatrix:
    """Scale every nonzero column to unit Euclidean norm."""
    norms = np.linalg.norm(F.data, axis=0)
    scale = np.where(norms > 0, norms, 1.0)
    return CoeffMatrix(F.n, F.data / scale[None, :], F.kind)


def save_coeffs(path, F: CoeffMatrix) -> None:
    """Write ``F`` in the binary ``FSHC`` container (little-endian, column-major)."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(COEFF_MAGIC, COEFF_VERSION, int(F.kind), F.n))
        fh.write(np.asarray(F.data, dtype="<f8").tobytes(order="F"))


def load_coeffs(path) -> CoeffMatrix:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, kind, n = _HEADER.unpack_from(raw)
    if magic != COEFF_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != COEFF_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    count = (n + 1) * (2 * n + 1)
    body = raw[_HEADER.size:]
    if len(body) != 8 * count:
        raise ValueError(f"{path}: expected {8 * count} payload bytes, got {len(body)}")
    data = np.frombuffer(body, dtype="<f8").reshape((n + 1, 2 * n + 1), order="F")
    return CoeffMatrix(int(n), data.astype(np.float64), Kind(kind))


def save_csv(path, F: CoeffMatrix) -> None:
    """Headerless CSV, one array row per line."""
    np.savetxt(path, F.data, delimiter=",", fmt="%.17g")


def load_csv(path, kind: Kind = Kind.SPHERICAL_HARMONIC) -> CoeffMatrix:
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
    n = data.shape[0] - 1
    return CoeffMatrix(n, data, kind)

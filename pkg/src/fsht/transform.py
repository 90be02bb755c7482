"""Plans and drivers for the spherical harmonic <-> Fourier conversion.

A column of order ``m`` is first re-expanded in normalized associated
Legendre functions of order ``p = |m| mod 2`` and then converted to
``cos(l theta)`` (``p = 0``) or ``sin((l+1) theta)`` (``p = 1``).

Two ways to reach order ``p`` are offered:

``Mode.DENSE_GIVENS``
    every column runs its full chain of Givens rotations.
``Mode.THIN_BUTTERFLY``
    the chain matrices of orders ``p + stride*i`` are materialized once and
    butterfly-compressed; a column walks by rotations to the nearest such
    order at or below its own and finishes with the butterfly.

The inverse applies the triangular trig-to-Legendre conversions and then
the transposed chains, the least-squares lift back to each order.
"""
from __future__ import annotations

import enum
import io
import logging
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .butterfly import (
    ButterflyFactorization,
    butterfly_apply,
    butterfly_apply_transpose,
    butterfly_factor,
    rank_statistics,
)
from .cheblegendre import HodlrPlan, KernelKind, build_hodlr, hodlr_apply
from .coeffs import CoeffMatrix, Kind, column_order
from .givens import RotationTable, right_multiply_layer

__all__ = [
    "Mode",
    "SphPlan",
    "plan",
    "sph2fourier",
    "fourier2sph",
    "eval_sph_point",
    "eval_fourier_point",
    "normalized_legendre",
    "save_plan",
    "load_plan",
    "plan_to_bytes",
    "plan_from_bytes",
    "PLAN_MAGIC",
    "PLAN_VERSION",
    "DEFAULT_STRIDE",
]

log = logging.getLogger(__name__)

PLAN_MAGIC = b"FSHT"
PLAN_VERSION = 1
DEFAULT_STRIDE = 64
DEFAULT_TOL = 2.0**-52

_HEADER = struct.Struct("<4sIQdII")
_SECTION = struct.Struct("<IIIQ")
_SEC_HODLR = 0
_SEC_BUTTERFLY = 1


class Mode(enum.IntEnum):
    DENSE_GIVENS = 0
    THIN_BUTTERFLY = 1

    @classmethod
    def parse(cls, name) -> "Mode":
        if isinstance(name, Mode):
            return name
        aliases = {"dense": cls.DENSE_GIVENS, "thin": cls.THIN_BUTTERFLY}
        try:
            return aliases[str(name).lower()]
        except KeyError:
            return cls[str(name).upper()]


@dataclass(frozen=True)
class SphPlan:
    """Everything needed to run both directions at bandlimit ``n``.

    ``factorizations[p]`` maps each compressed order ``M`` of parity ``p``
    to the butterfly factorizations of the even-degree and odd-degree halves
    of its chain matrix (the chain preserves degree parity, so the two
    halves are decoupled).
    """

    n: int
    tol: float
    mode: Mode
    stride: int
    rotations: RotationTable = field(repr=False)
    hodlr: dict = field(repr=False)
    factorizations: tuple = field(default=({}, {}), repr=False)

    @property
    def even_factorizations(self) -> dict:
        return self.factorizations[0]

    @property
    def odd_factorizations(self) -> dict:
        return self.factorizations[1]

    def compressed_orders(self, parity: int) -> list[int]:
        return sorted(self.factorizations[parity])

    def route(self, abs_m: int) -> int:
        """Order a column of order ``abs_m`` is walked to by rotations."""
        p = abs_m % 2
        if self.mode != Mode.THIN_BUTTERFLY or abs_m < p + self.stride:
            return p
        return p + self.stride * ((abs_m - p) // self.stride)

    def rank_stats(self):
        facs = [f for d in self.factorizations for pair in d.values() for f in pair]
        return rank_statistics(facs)

    @property
    def nbytes(self) -> int:
        return len(plan_to_bytes(self))


def _compressed_orders(n: int, stride: int, parity: int) -> list[int]:
    return list(range(parity + stride, n + 1, stride))


def _factor_chains(n: int, parity: int, stride: int, tol: float) -> dict:
    """Build chain matrices incrementally and compress them at stride orders."""
    targets = set(_compressed_orders(n, stride, parity))
    out: dict = {}
    if not targets:
        return out
    size = n + 1 - parity
    A = np.asfortranarray(np.eye(size))
    for m in range(parity, max(targets), 2):
        A = right_multiply_layer(A, m, n)
        M = m + 2
        if M in targets:
            out[M] = (butterfly_factor(A[0::2, 0::2], tol),
                      butterfly_factor(A[1::2, 1::2], tol))
    return out


def plan(n: int, tol: float = DEFAULT_TOL, mode=Mode.DENSE_GIVENS,
         stride: int = DEFAULT_STRIDE, cached: bool = True) -> SphPlan:
    """Precompute a transform plan for bandlimit ``n``.

    ``stride`` must be even so that compressed orders keep their parity.
    """
    if n < 0:
        raise ValueError(f"bandlimit must be non-negative, got {n}")
    if not 0 < tol < 1:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    mode = Mode.parse(mode)
    if stride < 2 or stride % 2:
        raise ValueError(f"stride must be a positive even integer, got {stride}")
    rotations = RotationTable(n, cached=cached)
    hodlr = _build_hodlr_set(n, tol)
    facs: tuple = ({}, {})
    if mode == Mode.THIN_BUTTERFLY:
        facs = tuple(_factor_chains(n, p, stride, tol) for p in (0, 1))
    return SphPlan(n, tol, mode, stride, rotations, hodlr, facs)


def _build_hodlr_set(n: int, tol: float) -> dict:
    out = {}
    for kind in KernelKind:
        size = n if kind in (KernelKind.LEG0_TO_COS, KernelKind.COS_TO_LEG0) else n - 1
        if size >= 0:
            out[kind] = build_hodlr(kind, size, tol)
    return out


# -- drivers ---------------------------------------------------------------

def _check_input(p: SphPlan, F: CoeffMatrix, kind: Kind) -> None:
    if not isinstance(F, CoeffMatrix):
        raise TypeError("expected a CoeffMatrix")
    if F.kind != kind:
        raise ValueError(f"expected {kind.name} coefficients, got {F.kind.name}")
    if F.n != p.n:
        raise ValueError(f"plan bandlimit {p.n} does not match coefficients with n={F.n}")


def _abs_orders(n: int) -> np.ndarray:
    j = np.arange(2 * n + 1)
    return (j + 1) // 2


def _by_target(p: SphPlan, absm: np.ndarray) -> dict:
    groups: dict = {}
    for j, m in enumerate(absm):
        groups.setdefault(p.route(int(m)), []).append(j)
    return {M: np.array(cols) for M, cols in groups.items()}


def _apply_halves(pair, block: np.ndarray, transpose: bool) -> np.ndarray:
    fe, fo = pair
    f = butterfly_apply_transpose if transpose else butterfly_apply
    rows = fe.shape[1] + fo.shape[1] if transpose else fe.shape[0] + fo.shape[0]
    out = np.zeros((rows, block.shape[1]))
    out[0::2] = f(fe, block[0::2])
    out[1::2] = f(fo, block[1::2])
    return out


def sph2fourier(p: SphPlan, F: CoeffMatrix) -> CoeffMatrix:
    """Spherical harmonic coefficients to bivariate Fourier coefficients."""
    _check_input(p, F, Kind.SPHERICAL_HARMONIC)
    n = p.n
    W = np.array(F.data, dtype=np.float64, order="F")
    absm = _abs_orders(n)
    parity = absm % 2
    target = np.array([p.route(int(m)) for m in absm], dtype=np.int64)
    p.rotations.chain_down(W, absm, target)
    for M, cols in _by_target(p, absm).items():
        if M < 2:
            continue
        pair = p.factorizations[M % 2][M]
        W[: n + 1 - M % 2, cols] = _apply_halves(pair, W[: n + 1 - M, cols], False)
    out = np.zeros_like(W)
    even = np.nonzero(parity == 0)[0]
    odd = np.nonzero(parity == 1)[0]
    out[:, even] = hodlr_apply(p.hodlr[KernelKind.LEG0_TO_COS], W[:, even])
    if n >= 1:
        out[:n, odd] = hodlr_apply(p.hodlr[KernelKind.LEG1_TO_SIN], W[:n, odd])
    return CoeffMatrix(n, out, Kind.FOURIER)


def fourier2sph(p: SphPlan, G: CoeffMatrix) -> CoeffMatrix:
    """Inverse of :func:`sph2fourier`: exact trig-to-Legendre conversion
    followed by the least-squares lift to each column's order."""
    _check_input(p, G, Kind.FOURIER)
    n = p.n
    absm = _abs_orders(n)
    parity = absm % 2
    W = np.zeros((n + 1, 2 * n + 1), order="F")
    even = np.nonzero(parity == 0)[0]
    odd = np.nonzero(parity == 1)[0]
    W[:, even] = hodlr_apply(p.hodlr[KernelKind.COS_TO_LEG0], G.data[:, even])
    if n >= 1:
        W[:n, odd] = hodlr_apply(p.hodlr[KernelKind.SIN_TO_LEG1], G.data[:n, odd])
    target = np.array([p.route(int(m)) for m in absm], dtype=np.int64)
    for M, cols in _by_target(p, absm).items():
        if M < 2:
            continue
        pair = p.factorizations[M % 2][M]
        lifted = _apply_halves(pair, W[: n + 1 - M % 2, cols], True)
        W[:, cols] = 0.0
        W[: n + 1 - M, cols] = lifted
    p.rotations.chain_up(W, absm, target)
    W[~CoeffMatrix.zeros(n).mask()] = 0.0
    return CoeffMatrix(n, W, Kind.SPHERICAL_HARMONIC)


# -- point evaluation oracles ----------------------------------------------

def normalized_legendre(n: int, m: int, theta: float) -> np.ndarray:
    """``P~_l^m(cos theta)`` for ``l = m..n``, orthonormal on ``[-1, 1]``,
    without the Condon-Shortley sign."""
    if m > n:
        return np.zeros(0)
    x, s = math.cos(theta), math.sin(theta)
    pmm = 1 / math.sqrt(2)
    for k in range(1, m + 1):
        pmm *= math.sqrt((2 * k + 1) / (2 * k)) * s
    out = np.empty(n - m + 1)
    out[0] = pmm
    if n == m:
        return out
    out[1] = math.sqrt(2 * m + 3) * x * pmm
    for l in range(m + 2, n + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) * (2 * l + 1) / ((l * l - m * m) * (2 * l - 3)))
        out[l - m] = a * x * out[l - m - 1] - b * out[l - m - 2]
    return out


def _longitudinal(j: int, phi: float) -> float:
    m = column_order(j).m
    if m == 0:
        return 1 / math.sqrt(2 * math.pi)
    if m < 0:
        return math.sin(-m * phi) / math.sqrt(math.pi)
    return math.cos(m * phi) / math.sqrt(math.pi)


def eval_sph_point(F: CoeffMatrix, theta: float, phi: float) -> float:
    """Direct sum of the spherical harmonic expansion at one point."""
    n = F.n
    total = 0.0
    for j in range(2 * n + 1):
        am = (j + 1) // 2
        lat = normalized_legendre(n, am, theta)
        total += _longitudinal(j, phi) * float(F.data[: n + 1 - am, j] @ lat)
    return total


def eval_fourier_point(G: CoeffMatrix, theta: float, phi: float) -> float:
    """Direct sum of the bivariate Fourier series at one point."""
    n = G.n
    l = np.arange(n + 1)
    cos_l = np.cos(l * theta)
    sin_l = np.sin((l + 1) * theta)
    total = 0.0
    for j in range(2 * n + 1):
        lat = cos_l if ((j + 1) // 2) % 2 == 0 else sin_l
        total += _longitudinal(j, phi) * float(G.data[:, j] @ lat)
    return total


# -- plan files ------------------------------------------------------------

def plan_to_bytes(p: SphPlan) -> bytes:
    """Serialize a plan; rotations are recomputed on load."""
    buf = io.BytesIO()
    buf.write(_HEADER.pack(PLAN_MAGIC, PLAN_VERSION, p.n, p.tol, int(p.mode), p.stride))
    sections = []
    for kind in sorted(p.hodlr):
        sections.append((_SEC_HODLR, int(kind), 0, p.hodlr[kind].to_bytes()))
    for parity in (0, 1):
        for M in sorted(p.factorizations[parity]):
            for half, fac in enumerate(p.factorizations[parity][M]):
                sections.append((_SEC_BUTTERFLY, M, half, fac.to_bytes()))
    buf.write(struct.pack("<I", len(sections)))
    for tag, a, b, raw in sections:
        buf.write(_SECTION.pack(tag, a, b, len(raw)))
        buf.write(raw)
    return buf.getvalue()


def plan_from_bytes(raw: bytes, cached: bool = True) -> SphPlan:
    if len(raw) < _HEADER.size + 4:
        raise ValueError("truncated plan file")
    magic, version, n, tol, mode, stride = _HEADER.unpack_from(raw, 0)
    if magic != PLAN_MAGIC:
        raise ValueError(f"not a plan file (magic {magic!r})")
    if version != PLAN_VERSION:
        raise ValueError(f"unsupported plan version {version}")
    pos = _HEADER.size
    (count,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    hodlr: dict = {}
    halves: dict = {}
    for _ in range(count):
        tag, a, b, length = _SECTION.unpack_from(raw, pos)
        pos += _SECTION.size
        body = raw[pos:pos + length]
        if len(body) != length:
            raise ValueError("truncated plan section")
        pos += length
        if tag == _SEC_HODLR:
            hodlr[KernelKind(a)] = HodlrPlan.from_bytes(body)
        elif tag == _SEC_BUTTERFLY:
            halves[(a, b)] = ButterflyFactorization.from_bytes(body)
        else:
            raise ValueError(f"unknown plan section tag {tag}")
    if pos != len(raw):
        raise ValueError("trailing bytes after plan")
    facs: tuple = ({}, {})
    for (M, half) in sorted(halves):
        if half == 0:
            facs[M % 2][M] = (halves[(M, 0)], halves[(M, 1)])
    return SphPlan(n, tol, Mode(mode), stride, RotationTable(n, cached=cached), hodlr, facs)


def save_plan(path, p: SphPlan) -> int:
    raw = plan_to_bytes(p)
    with open(path, "wb") as fh:
        fh.write(raw)
    return len(raw)


def load_plan(path, cached: bool = True) -> SphPlan:
    with open(path, "rb") as fh:
        return plan_from_bytes(fh.read(), cached=cached)

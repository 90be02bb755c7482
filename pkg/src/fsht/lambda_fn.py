"""The gamma-function ratio Lambda(z) = Gamma(z + 1/2) / Gamma(z + 1).

Above ``THRESHOLD`` a seven-term asymptotic series in ``1/(z + 1/4)`` is
accurate to machine precision; below it the argument is lifted by whole
steps using ``Lambda(z) = Lambda(z+1) (z+1) / (z+1/2)``.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["THRESHOLD", "ASYMPTOTIC_COEFFS", "LambdaEvaluator", "lam"]

THRESHOLD = 9.84475

# Coefficients of (z + 1/4)^{-2i}, i = 0..6.
ASYMPTOTIC_COEFFS = (
    (1, 1),
    (-1, 64),
    (21, 8192),
    (-671, 524288),
    (180323, 134217728),
    (-20898423, 8589934592),
    (7426362705, 1099511627776),
)


class LambdaEvaluator:
    """Vectorized evaluation of Lambda on non-negative reals."""

    def __init__(self, threshold: float = THRESHOLD):
        self.threshold = threshold
        self.coeffs = np.array([p / q for p, q in ASYMPTOTIC_COEFFS])

    def _asymptotic(self, z: np.ndarray) -> np.ndarray:
        w = z + 0.25
        r = 1.0 / (w * w)
        acc = np.full_like(w, self.coeffs[-1])
        for a in self.coeffs[-2::-1]:
            acc = acc * r + a
        return acc / np.sqrt(w)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        if np.any(z < 0) or np.any(np.isnan(z)):
            raise ValueError("Lambda is only evaluated at non-negative arguments")
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        # number of unit lifts needed to pass the threshold
        steps = np.where(z > self.threshold,
                         0, np.floor(self.threshold - z).astype(np.int64) + 1)
        out = self._asymptotic(z + steps)
        low = steps > 0
        if np.any(low):
            zl = z[low]
            sl = steps[low]
            num = np.ones_like(zl)
            den = np.ones_like(zl)
            for i in range(int(sl.max())):
                active = i < sl
                num = np.where(active, num * (zl + (i + 1.0)), num)
                den = np.where(active, den * (zl + (i + 0.5)), den)
            out[low] = out[low] * (num / den)
        return float(out[0]) if scalar else out


_default = LambdaEvaluator()


def lam(z):
    """Lambda(z) for scalar or array ``z >= 0``."""
    return _default(z)


def _reference(z: float) -> float:
    # log-gamma path, for quick interactive checks only
    return math.exp(math.lgamma(z + 0.5) - math.lgamma(z + 1.0))

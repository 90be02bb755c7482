"""How the round-trip error grows with the bandlimit.

Random coefficients with unit-norm columns are pushed to Fourier
coefficients and back.  Every step is either a product of plane rotations
or a well-conditioned triangular conversion, so the error should grow
roughly like sqrt(n) times the unit roundoff.
"""
import math
import time

import numpy as np

from fsht import CoeffMatrix, fourier2sph, plan, sph2fourier

EPS = np.finfo(float).eps
rng = np.random.default_rng(0)

print(f"{'n':>6} {'err':>10} {'err/(sqrt(n) eps)':>18} {'fwd s':>8} {'inv s':>8}")
for n in (31, 63, 127, 255, 511, 1023, 2047):
    p = plan(n)
    errs, tf, ti = [], 0.0, 0.0
    for _ in range(3):
        F = CoeffMatrix.random(n, rng)
        t0 = time.perf_counter()
        G = sph2fourier(p, F)
        t1 = time.perf_counter()
        H = fourier2sph(p, G)
        t2 = time.perf_counter()
        tf += t1 - t0
        ti += t2 - t1
        errs.append(np.linalg.norm(H.data - F.data, axis=0).max())
    err = float(np.mean(errs))
    print(f"{n:6d} {err:10.2e} {err / (math.sqrt(n) * EPS):18.2f} {tf / 3:8.3f} {ti / 3:8.3f}")

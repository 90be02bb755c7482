"""Evaluate one bandlimited function two ways.

The spherical harmonic sum and the Fourier sum describe the same function,
so summing either series directly at random points must give the same
values.  The naive sums cost O(n^2) per point and are only meant as a
check.
"""
import math

import numpy as np

from fsht import CoeffMatrix, eval_fourier_point, eval_sph_point, plan, sph2fourier

n = 40
rng = np.random.default_rng(2)

# a smooth field: coefficients decaying with degree
F = CoeffMatrix.zeros(n)
for l in range(n + 1):
    for m in range(-l, l + 1):
        F[l, m] = rng.standard_normal() / (1 + l) ** 2

G = sph2fourier(plan(n), F)
pts = rng.uniform([0, 0], [math.pi, 2 * math.pi], (8, 2))
print(f"{'theta':>7} {'phi':>7} {'harmonic sum':>15} {'Fourier sum':>15} {'diff':>9}")
for theta, phi in pts:
    a = eval_sph_point(F, theta, phi)
    b = eval_fourier_point(G, theta, phi)
    print(f"{theta:7.3f} {phi:7.3f} {a:15.10f} {b:15.10f} {abs(a - b):9.1e}")

"""Storage and accuracy of thin plans as the stride varies.

A thin plan compresses the connection matrices only at every ``stride``-th
order and reaches the other orders with a short run of rotations.  Smaller
strides store more butterflies; larger strides spend more time rotating.
"""
import time

import numpy as np

from fsht import CoeffMatrix, fourier2sph, plan, sph2fourier

n = 1023
rng = np.random.default_rng(1)
F = CoeffMatrix.random(n, rng)
dense = plan(n)
G_ref = sph2fourier(dense, F)
print(f"dense plan: {dense.nbytes / 1e6:.1f} MB on disk (rotations are rebuilt on load)")

print(f"{'stride':>6} {'build s':>8} {'MB':>7} {'rank avg':>9} {'rank std':>9} {'vs dense':>9} {'round trip':>11}")
for stride in (32, 64, 128, 256):
    t0 = time.perf_counter()
    p = plan(n, mode="thin", stride=stride)
    build = time.perf_counter() - t0
    G = sph2fourier(p, F)
    H = fourier2sph(p, G)
    st = p.rank_stats()
    diff = np.abs(G.data - G_ref.data).max()
    rt = np.linalg.norm(H.data - F.data, axis=0).max()
    print(f"{stride:6d} {build:8.2f} {p.nbytes / 1e6:7.1f} {st.avg:9.1f} {st.std:9.1f} {diff:9.1e} {rt:11.1e}")

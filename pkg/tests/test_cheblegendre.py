import math

import numpy as np
import pytest
from scipy.special import eval_legendre, lpmv, roots_legendre

from fsht.cheblegendre import (
    BarycentricGrid,
    HodlrPlan,
    KernelKind,
    LowRank,
    barycentric_matrix,
    build_hodlr,
    dense_convert,
    dense_matrix,
    hodlr_apply,
    interp_degree,
    kernel_entry,
    keiner_bound,
    lemma_4f3_check,
    well_separated,
)


def quadrature_matrix(kind, n):
    """Conversion matrices by exact quadrature of the basis functions."""
    K = 2 * n + 8
    th = (np.arange(K) + 0.5) * np.pi / K
    xg, wg = roots_legendre(n + 8)
    l = np.arange(n + 1)[:, None]
    M = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        if kind == KernelKind.LEG0_TO_COS:
            f = math.sqrt(j + 0.5) * eval_legendre(j, np.cos(th))
            M[:, j] = (2 - (l[:, 0] == 0)) / K * (np.cos(l * th) @ f)
        elif kind == KernelKind.LEG1_TO_SIN:
            f = -math.sqrt((j + 1.5) / ((j + 1) * (j + 2))) * lpmv(1, j + 1, np.cos(th))
            M[:, j] = 2 / K * (np.sin((l + 1) * th) @ f)
        elif kind == KernelKind.COS_TO_LEG0:
            P = np.sqrt(l + 0.5) * eval_legendre(l, xg)
            M[:, j] = P @ (wg * np.cos(j * np.arccos(xg)))
        else:
            P = -np.sqrt((l + 1.5) / ((l + 1) * (l + 2))) * lpmv(1, l + 1, xg)
            M[:, j] = P @ (wg * np.sin((j + 1) * np.arccos(xg)))
    return M


@pytest.mark.parametrize("kind", list(KernelKind))
@pytest.mark.parametrize("n", [0, 1, 6, 33])
def test_dense_matrix_matches_quadrature(kind, n):
    D = dense_matrix(kind, n)
    Q = quadrature_matrix(kind, n)
    assert np.abs(D - Q).max() <= 1e-13 * np.abs(Q).max()


def test_entry_examples():
    assert kernel_entry(KernelKind.LEG0_TO_COS, 0, 0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert kernel_entry(KernelKind.LEG0_TO_COS, 1, 1) == pytest.approx(math.sqrt(1.5), rel=1e-15)
    assert kernel_entry(KernelKind.COS_TO_LEG0, 0, 0) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert kernel_entry(KernelKind.LEG0_TO_COS, 1, 2) == 0.0
    assert kernel_entry(KernelKind.LEG0_TO_COS, 3, 1) == 0.0


@pytest.mark.parametrize("kind", [KernelKind.LEG0_TO_COS, KernelKind.LEG1_TO_SIN])
def test_pairs_are_inverse(kind):
    A = dense_matrix(kind, 300)
    B = dense_matrix(kind.inverse, 300)
    assert np.abs(B @ A - np.eye(301)).max() <= 1e-13
    assert kind.inverse.inverse == kind


def test_interp_degree():
    assert interp_degree(2.0**-52) == 22
    assert interp_degree(1e-8) == 12
    assert interp_degree(0.9) == 1
    with pytest.raises(ValueError):
        interp_degree(0.0)
    assert keiner_bound(22) <= 2.0**-52


def test_barycentric_reproduces_polynomials():
    grid = BarycentricGrid(8)
    x = np.linspace(3, 40, 38)
    W = barycentric_matrix(grid, 3, 40, x)
    t = grid.nodes(3, 40)
    u, s = (t - 21.5) / 18.5, (x - 21.5) / 18.5
    for deg in range(9):
        np.testing.assert_allclose(W @ u**deg, s**deg, atol=1e-14)
    # a target landing on a node picks that sample exactly
    W = barycentric_matrix(grid, 3, 40, t[:2])
    np.testing.assert_array_equal(W, np.eye(9)[:2])


def test_well_separated():
    assert well_separated(0, 4, 6, 10)
    assert not well_separated(0, 4, 5, 9)


@pytest.mark.parametrize("kind", list(KernelKind))
@pytest.mark.parametrize("n", [0, 5, 64, 700])
def test_hodlr_matches_dense(kind, n, rng):
    p = build_hodlr(kind, n)
    V = rng.standard_normal((n + 1, 3))
    ref = dense_convert(kind, V)
    assert np.linalg.norm(hodlr_apply(p, V) - ref) <= 1e-13 * np.linalg.norm(ref)
    v = V[:, 0]
    np.testing.assert_allclose(hodlr_apply(p, v), hodlr_apply(p, V)[:, 0], rtol=0,
                               atol=1e-14 * np.abs(ref).max())


def test_hodlr_uses_low_rank_blocks():
    p = build_hodlr(KernelKind.LEG0_TO_COS, 1000)
    low = [b for b in p.blocks if isinstance(b, LowRank)]
    assert low
    assert all(b.W.shape[1] == p.k + 1 for b in low)
    # blocks tile the upper triangle of each half exactly once
    for parity in (0, 1):
        size = (1000 - parity) // 2 + 1
        cover = np.zeros((size, size), int)
        for b in p.blocks:
            if b.parity == parity:
                cover[b.r0:b.r1, b.c0:b.c1] += 1
        assert np.all(cover[np.triu_indices(size)] == 1)


def test_hodlr_lower_tolerance(rng):
    p = build_hodlr(KernelKind.COS_TO_LEG0, 900, tol=1e-8)
    assert p.k == 12
    v = rng.standard_normal(901)
    ref = dense_convert(KernelKind.COS_TO_LEG0, v)
    assert np.linalg.norm(hodlr_apply(p, v) - ref) <= 1e-7 * np.linalg.norm(ref)


def test_hodlr_serialization(rng):
    p = build_hodlr(KernelKind.SIN_TO_LEG1, 500)
    raw = p.to_bytes()
    q = HodlrPlan.from_bytes(raw)
    assert q.to_bytes() == raw
    v = rng.standard_normal(501)
    np.testing.assert_array_equal(hodlr_apply(q, v), hodlr_apply(p, v))


def test_hodlr_rejects_bad_input():
    with pytest.raises(ValueError):
        build_hodlr(KernelKind.LEG0_TO_COS, -1)
    with pytest.raises(ValueError):
        hodlr_apply(build_hodlr(KernelKind.LEG0_TO_COS, 4), np.zeros(4))


def test_flop_count_beats_dense_at_scale():
    p = build_hodlr(KernelKind.LEG0_TO_COS, 2048)
    assert p.apply_flops() < p.dense_flops()


@pytest.mark.parametrize("l,m", [(0, 1), (1, 1), (5, 3), (20, 20), (13, 0)])
def test_summation_identity(l, m):
    lhs, rhs = lemma_4f3_check(l, m)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_summation_identity_small_case():
    lhs, rhs = lemma_4f3_check(0, 1)
    assert lhs == pytest.approx(6.0, rel=1e-14) and rhs == pytest.approx(6.0, rel=1e-14)

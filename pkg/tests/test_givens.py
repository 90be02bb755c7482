import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fsht.givens import (
    RotationTable,
    apply_layer,
    apply_layer_transpose,
    chain_matrix,
    connection_entry,
    connection_matrix,
    dense_layer_matrix,
    layer_rotations,
    lower_order_chain,
    rotation_params,
)

EPS = np.finfo(float).eps


def test_first_rotations():
    r = rotation_params(0, 0)
    assert r.s == pytest.approx(math.sqrt(1 / 6), abs=EPS)
    assert r.c == pytest.approx(math.sqrt(5 / 6), abs=EPS)
    r = rotation_params(1, 0)
    assert r.s == pytest.approx(math.sqrt(6 / 20), abs=EPS)
    assert r.c == pytest.approx(math.sqrt(14 / 20), abs=EPS)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_rotation_is_unit(j, m):
    r = rotation_params(j, m)
    assert abs(r.s**2 + r.c**2 - 1) <= 4 * EPS


def test_overflow_guard_boundary():
    rotation_params(31_635_420, 31_635_420)
    with pytest.raises(OverflowError):
        rotation_params(31_635_421, 31_635_421)
    with pytest.raises(ValueError):
        rotation_params(-1, 0)
    with pytest.raises(OverflowError):
        RotationTable(10**8)


def test_vectorized_parameters_match_scalar():
    lr = layer_rotations(7, 40)
    for j in range(40):
        r = rotation_params(j, 7)
        assert lr.s[j] == r.s and lr.c[j] == r.c


def test_rotation_product_matches_closed_form():
    for n, m in [(0, 0), (1, 0), (5, 3), (30, 1), (64, 20)]:
        A = dense_layer_matrix(n, m)
        B = connection_matrix(n, m)
        assert np.abs(A - B).max() <= 1e-14 * np.abs(B).max()


def test_scalar_and_matrix_oracles_agree():
    B = connection_matrix(40, 9)
    for l in range(43):
        for q in range(41):
            assert connection_entry(l, q, 9) == pytest.approx(B[l, q], rel=1e-13, abs=1e-300)


def test_small_entries_from_exact_arithmetic():
    # first column: order 2, degree 2 expressed in order-0 degrees 0 and 2
    assert connection_entry(0, 0, 0) == pytest.approx(math.sqrt(5 / 6), rel=1e-15)
    assert connection_entry(2, 0, 0) == pytest.approx(-math.sqrt(1 / 6), rel=1e-15)
    assert connection_entry(1, 0, 0) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 80), st.integers(0, 40))
def test_layer_has_orthonormal_columns(n, m):
    A = dense_layer_matrix(n, m)
    assert np.linalg.norm(A.T @ A - np.eye(n + 1)) <= 10 * math.sqrt(n) * EPS


def test_apply_and_transpose(rng):
    v = rng.standard_normal(12)
    w = apply_layer(4, v)
    np.testing.assert_allclose(w, dense_layer_matrix(11, 4) @ v, atol=1e-15)
    np.testing.assert_allclose(apply_layer_transpose(4, w), v, atol=1e-14)


def test_chain_roundtrip_and_matrix(rng):
    N = 50
    for m in (7, 10):
        v = rng.standard_normal(N + 1 - m)
        down = lower_order_chain(m, m % 2, v)
        A = chain_matrix(N, m)
        np.testing.assert_allclose(down, A @ v, atol=1e-14)
        assert np.linalg.norm(down) == pytest.approx(np.linalg.norm(v), rel=1e-14)
        np.testing.assert_allclose(lower_order_chain(m, m % 2, down, "up"), v, atol=1e-14)
    with pytest.raises(ValueError):
        lower_order_chain(4, 1, np.zeros(3))


@pytest.mark.parametrize("cached", [True, False])
def test_table_chains_match_single_column(rng, cached):
    N = 30
    table = RotationTable(N, cached=cached)
    absm = np.array([0, 2, 5, 8, 9])
    W = np.zeros((N + 1, len(absm)), order="F")
    for k, m in enumerate(absm):
        W[: N + 1 - m, k] = rng.standard_normal(N + 1 - m)
    orig = W.copy()
    table.chain_down(W, absm, absm % 2)
    for k, m in enumerate(absm):
        if m >= 2:
            np.testing.assert_allclose(W[: N + 1 - m % 2, k],
                                       lower_order_chain(int(m), int(m % 2), orig[: N + 1 - m, k]),
                                       atol=1e-14)
    table.chain_up(W, absm, absm % 2)
    np.testing.assert_allclose(W, orig, atol=1e-14)


def test_table_storage():
    assert RotationTable(10).nbytes == 2 * 9 * 9 * 8
    assert RotationTable(10, cached=False).nbytes == 0
    assert RotationTable(0).nbytes == 0

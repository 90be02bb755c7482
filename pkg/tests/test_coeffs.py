import numpy as np
import pytest
from hypothesis import given, strategies as st

from fsht.coeffs import (
    CoeffMatrix,
    Kind,
    column_of_order,
    column_order,
    degree_of,
    layout_index,
    load_coeffs,
    load_csv,
    normalize_columns,
    parity_shuffle,
    parity_unshuffle,
    save_coeffs,
    save_csv,
)


def test_column_orders_alternate_sign():
    assert [column_order(j).m for j in range(7)] == [0, -1, 1, -2, 2, -3, 3]
    assert [int(column_order(j).parity) for j in range(5)] == [0, 1, 1, 0, 0]


def test_layout_examples():
    assert layout_index(0, 0, 4) == (0, 0)
    assert layout_index(3, -2, 4) == (1, 3)
    assert layout_index(3, 2, 4) == (1, 4)
    with pytest.raises(ValueError):
        layout_index(1, 2, 4)
    with pytest.raises(ValueError):
        layout_index(5, 0, 4)


@given(st.integers(0, 40).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, n)).flatmap(
        lambda t: st.tuples(st.just(t[0]), st.just(t[1]), st.integers(-t[1], t[1])))))
def test_layout_roundtrip(nlm):
    n, l, m = nlm
    row, col = layout_index(l, m, n)
    assert column_of_order(m) == col
    assert degree_of(row, col, n) == (l, m)


def test_mask_matches_staircase():
    F = CoeffMatrix.zeros(3)
    assert F.mask().sum() == 16
    assert list(F.column_lengths()) == [4, 3, 3, 2, 2, 1, 1]
    G = CoeffMatrix.zeros(3, Kind.FOURIER)
    assert list(G.column_lengths()) == [4, 3, 3, 4, 4, 3, 3]


def test_item_access_and_shape_check():
    F = CoeffMatrix.zeros(2)
    F[2, -1] = 5.0
    assert F.data[1, 1] == 5.0 and F[2, -1] == 5.0
    with pytest.raises(ValueError):
        CoeffMatrix(2, np.zeros((3, 4)))
    with pytest.raises(TypeError):
        CoeffMatrix.zeros(2, Kind.FOURIER)[0, 0]


def test_random_is_normalized_and_structured(rng):
    F = CoeffMatrix.random(20, rng)
    assert np.all(F.data[~F.mask()] == 0)
    np.testing.assert_allclose(np.linalg.norm(F.data, axis=0), 1.0, rtol=0, atol=4e-16)


def test_normalize_leaves_zero_columns():
    F = CoeffMatrix.zeros(2)
    F.data[0, 2] = 3.0
    G = normalize_columns(F)
    assert G.data[0, 2] == 1.0
    assert np.all(G.data[:, 0] == 0)


@given(st.integers(0, 50), st.integers(1, 3))
def test_parity_shuffle_roundtrip(size, width):
    v = np.arange(size * width, dtype=float).reshape(size, width)
    e, o = parity_shuffle(v)
    assert len(e) == (size + 1) // 2
    np.testing.assert_array_equal(parity_unshuffle(e, o), v)


def test_unshuffle_rejects_bad_lengths():
    with pytest.raises(ValueError):
        parity_unshuffle(np.zeros(1), np.zeros(3))


def test_binary_roundtrip(tmp_path, rng):
    F = CoeffMatrix.random(7, rng, Kind.FOURIER)
    path = tmp_path / "f.fshc"
    save_coeffs(path, F)
    G = load_coeffs(path)
    assert G.kind == Kind.FOURIER and G.n == 7
    np.testing.assert_array_equal(G.data, F.data)
    raw = path.read_bytes()
    assert raw[:4] == b"FSHC" and len(raw) == 20 + 8 * 8 * 15


def test_binary_rejects_corruption(tmp_path, rng):
    path = tmp_path / "f.fshc"
    save_coeffs(path, CoeffMatrix.random(3, rng))
    raw = path.read_bytes()
    (tmp_path / "bad").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        load_coeffs(tmp_path / "bad")
    (tmp_path / "short").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_coeffs(tmp_path / "short")


def test_csv_roundtrip(tmp_path, rng):
    F = CoeffMatrix.random(5, rng)
    save_csv(tmp_path / "f.csv", F)
    np.testing.assert_array_equal(load_csv(tmp_path / "f.csv").data, F.data)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddcl.numerics import DegenerateInputError, as_matrix, frobenius_norm, make_rng, pairwise_sq_dists, pearson_corr


def test_sq_dists_coincident_and_hand_values():
    assert pairwise_sq_dists(np.zeros((1, 2)), np.zeros((2, 1)))[0, 0] == 0.0
    P = np.array([[1.0, 0.0], [0.0, 2.0]])
    np.testing.assert_array_equal(pairwise_sq_dists(np.zeros((1, 2)), P), [[1.0, 4.0]])


def test_sq_dists_match_expanded_form(rng):
    Z = rng.normal(size=(30, 7))
    P = rng.normal(size=(7, 4))
    expanded = (Z ** 2).sum(1)[:, None] - 2 * Z @ P + (P ** 2).sum(0)[None, :]
    np.testing.assert_allclose(pairwise_sq_dists(Z, P), expanded, atol=1e-12)


def test_sq_dists_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        pairwise_sq_dists(np.zeros((2, 3)), np.zeros((2, 2)))


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
       st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_sq_dists_symmetric_roles(z, p):
    z, p = np.array(z), np.array(p)
    assert pairwise_sq_dists(z[None], p[:, None])[0, 0] == pairwise_sq_dists(p[None], z[:, None])[0, 0]


def test_frobenius(rng):
    assert frobenius_norm(np.zeros((3, 3))) == 0.0
    assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2), abs=1e-15)
    M = rng.normal(size=(5, 6))
    assert frobenius_norm(M) == pytest.approx(np.sqrt(sum(x * x for x in M.ravel())), abs=1e-12)


@given(st.floats(-100, 100))
@settings(max_examples=50)
def test_frobenius_homogeneous(c):
    M = np.arange(12.0).reshape(3, 4) - 5
    assert frobenius_norm(c * M) == pytest.approx(abs(c) * frobenius_norm(M), rel=1e-12, abs=1e-12)


def test_pearson():
    a = np.array([1.0, 2.0, 5.0, 3.0])
    assert pearson_corr(a, a) == 1.0
    assert pearson_corr(a, -a) == -1.0
    x, y = np.array([1.0, 2, 3]), np.array([2.0, 4, 7])
    mx, my = x.mean(), y.mean()
    ref = np.sum((x - mx) * (y - my)) / np.sqrt(np.sum((x - mx) ** 2) * np.sum((y - my) ** 2))
    assert pearson_corr(x, y) == pytest.approx(ref, abs=1e-15)


def test_pearson_degenerate():
    with pytest.raises(DegenerateInputError):
        pearson_corr([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateInputError):
        pearson_corr([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        pearson_corr([1.0, 2.0, 3.0], [1.0, 2.0])


def test_rng_reproducible():
    a = make_rng(7).normal(size=(4, 4))
    b = make_rng(7).normal(size=(4, 4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_rng(8).normal(size=(4, 4)))


def test_as_matrix_rejects_nan():
    with pytest.raises(ValueError, match="NaN"):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError, match="2-D"):
        as_matrix([1.0, 2.0])

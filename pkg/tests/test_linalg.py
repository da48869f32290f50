import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import singular_values_gram, singular_values_oracle
from conftest import random_matrix
from specmult import linalg
from specmult.linalg import ConvergenceError, mat_trace, op_norm, schatten_q, svd


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_identity_singular_values():
    assert np.array_equal(svd(np.eye(3)), [1.0, 1.0, 1.0])


def test_diagonal_moduli_sorted():
    np.testing.assert_allclose(svd(np.diag([3, 4j])), [4.0, 3.0], rtol=1e-15)


def test_random_8x8_against_gram_eigensolver(rng):
    a = random_matrix(rng, 8)
    np.testing.assert_allclose(svd(a), singular_values_gram(a), rtol=1e-12)


@pytest.mark.parametrize("shape", [(1, 1), (5, 3), (3, 5), (7, 7), (12, 4)])
def test_shapes_against_embedding_oracle(rng, shape):
    a = random_matrix(rng, *shape)
    s = svd(a)
    assert s.shape == (min(shape),)
    np.testing.assert_allclose(s, singular_values_oracle(a), rtol=1e-12)


@pytest.mark.parametrize("n", [16, 64, 128])
def test_large_against_numpy(rng, n):
    a = random_matrix(rng, n)
    np.testing.assert_allclose(svd(a), np.linalg.svd(a, compute_uv=False), rtol=1e-12)


def test_unitary_invariance(rng):
    a = random_matrix(rng, 9)
    u, v = random_unitary(rng, 9), random_unitary(rng, 9)
    np.testing.assert_allclose(svd(u @ a @ v), svd(a), rtol=1e-10)
    for r in (0.5, 1.0, 2.0, np.inf):
        assert schatten_q(u @ a @ v, r) == pytest.approx(schatten_q(a, r), rel=1e-10)


def test_block_diagonal_merges(rng):
    a, b = random_matrix(rng, 4), random_matrix(rng, 6)
    big = np.zeros((10, 10), dtype=complex)
    big[:4, :4], big[4:, 4:] = a, b
    merged = np.sort(np.concatenate([svd(a), svd(b)]))[::-1]
    np.testing.assert_allclose(svd(big), merged, rtol=1e-12)


def test_rank_deficient_clamped_to_zero(rng):
    u = random_matrix(rng, 6, 2)
    a = u @ random_matrix(rng, 2, 6)
    s = svd(a)
    assert np.all(s[2:] == 0.0)
    np.testing.assert_allclose(s[:2], np.linalg.svd(a, compute_uv=False)[:2], rtol=1e-12)


def test_zero_matrix():
    assert np.array_equal(svd(np.zeros((3, 2))), [0.0, 0.0])
    assert schatten_q(np.zeros((2, 2)), 0.5) == 0.0


@pytest.mark.parametrize("bad", [np.array([1.0, 2.0]), np.zeros((0, 3)), np.array([[1.0, np.nan]]), np.array([[np.inf]])])
def test_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        svd(bad)


def test_nonconvergence_is_an_error(rng, monkeypatch):
    monkeypatch.setattr(linalg, "MAX_SWEEPS", 1)
    with pytest.raises(ConvergenceError):
        svd(random_matrix(rng, 20))


def test_schatten_examples():
    assert schatten_q(np.eye(5), 1) == pytest.approx(5.0, rel=1e-15)
    assert schatten_q(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0, rel=1e-15)


def test_schatten_half_against_oracle(rng):
    a = random_matrix(rng, 6)
    s = singular_values_oracle(a)
    assert schatten_q(a, 0.5) == pytest.approx(np.sum(np.sqrt(s)) ** 2, rel=1e-12)


@pytest.mark.parametrize("r", [0.0, -1.0, float("nan")])
def test_schatten_rejects_nonpositive(r):
    with pytest.raises(ValueError):
        schatten_q(np.eye(2), r)


def test_op_norm_examples(rng):
    assert op_norm(np.eye(4)) == 1.0
    assert op_norm(np.diag([3, 4j])) == pytest.approx(4.0)
    a = random_matrix(rng, 5)
    assert op_norm(a) == pytest.approx(singular_values_oracle(a).max(), rel=1e-12)


def test_trace_examples(rng):
    assert mat_trace(np.eye(4)) == 4
    assert mat_trace(np.array([[1, 5], [7, 2j]])) == 1 + 2j
    a, u = random_matrix(rng, 6), random_unitary(rng, 6)
    assert abs(mat_trace(u @ a @ u.conj().T) - mat_trace(a)) < 1e-12 * np.abs(a).sum()
    with pytest.raises(ValueError):
        mat_trace(np.ones((2, 3)))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite),
       hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_norm_relations_property(re, im):
    shape = (min(re.shape[0], im.shape[0]), min(re.shape[1], im.shape[1]))
    a = re[: shape[0], : shape[1]] + 1j * im[: shape[0], : shape[1]]
    s = svd(a)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    fro2 = float(np.sum(np.abs(a) ** 2))
    assert schatten_q(a, 2) ** 2 == pytest.approx(fro2, rel=1e-12, abs=1e-300)
    top = op_norm(a)
    for r in (0.5, 1.0, 2.0):
        assert top <= schatten_q(a, r) * (1 + 1e-12)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), rtol=1e-10, atol=1e-12 * max(top, 1e-300))

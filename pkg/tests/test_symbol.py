import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix, random_symbol
from specmult.fourier import FourierCoefficients, GridFunction, forward
from specmult.group import character_multiplication, torus_translation
from specmult.linalg import mat_trace, op_norm, schatten_q
from specmult.manifold import build_quadrature, enumerate_partition
from specmult.symbol import (
    SlowDecayWarning,
    Symbol,
    apply,
    assemble,
    check_invariance,
    compose,
    conjugate,
    extract,
    from_spectral_function,
    grid_operator,
    l2_bound,
    lp_norm,
    power_symbol,
    recognize_power,
    schatten,
    sobolev_order,
    trace_formula,
)


@pytest.fixture(scope="module")
def t2():
    return enumerate_partition("torus2", 20)


def random_coeffs(rng, p):
    return FourierCoefficients(p, rng.normal(size=p.total_dim) + 1j * rng.normal(size=p.total_dim))


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- construction ---------------------------------------------------------


def test_identity_from_constant_function(t2):
    sigma = from_spectral_function(t2, lambda lam: 1.0)
    for b, d in zip(sigma.blocks, t2.dims):
        assert np.array_equal(b, np.eye(d))


def test_resolvent_on_torus1():
    p = enumerate_partition("torus1", 4)
    sigma = from_spectral_function(p, lambda lam: 1 / (1 + lam))
    assert np.array_equal(sigma[2], np.diag([0.2, 0.2]))


def test_non_finite_function_rejected():
    p = enumerate_partition("torus1", 4)
    with pytest.raises(ValueError):
        from_spectral_function(p, lambda lam: 1 / lam if lam else math.inf)


def test_block_shape_and_finiteness_checked(t2):
    with pytest.raises(ValueError):
        Symbol(t2, tuple(np.eye(d + 1) for d in t2.dims))
    with pytest.raises(ValueError):
        Symbol(t2, tuple(np.eye(d) for d in t2.dims[:-1]))
    bad = [np.eye(d) for d in t2.dims]
    bad[2] = bad[2] * np.nan
    with pytest.raises(ValueError):
        Symbol(t2, tuple(bad))


@pytest.mark.parametrize("alpha,r", [(3.0, 1.0), (2.5, 0.5), (4.0, 2.0)])
def test_power_symbol_schatten_partial_sum(t2, alpha, r):
    sigma = power_symbol(t2, alpha)
    expected = sum(d * (1 + lam) ** (-alpha * r / 2) for lam, d in zip(t2.lambdas, t2.dims))
    assert schatten(sigma, r).value ** r == pytest.approx(expected, rel=1e-12)


# --- application and extraction -------------------------------------------


def test_identity_apply(t2, rng):
    c = random_coeffs(rng, t2)
    assert np.array_equal(apply(Symbol.identity(t2), c).data, c.data)


def test_apply_to_basis_function_gives_column(t2, rng):
    sigma = random_symbol(rng, t2)
    for i in range(len(t2)):
        for k in range(1, t2.dims[i] + 1):
            out = apply(sigma, FourierCoefficients.unit(t2, i, k))
            np.testing.assert_array_equal(out.level(i), sigma[i][:, k - 1])
            rest = np.delete(out.data, np.arange(t2.offsets[i], t2.offsets[i + 1]))
            assert np.all(rest == 0)


def test_apply_matches_dense_assembly(t2, rng):
    sigma = random_symbol(rng, t2)
    c = random_coeffs(rng, t2)
    np.testing.assert_allclose(apply(sigma, c).data, assemble(sigma) @ c.data, atol=1e-12)


def test_apply_partition_mismatch(t2, rng):
    c = random_coeffs(rng, enumerate_partition("torus2", 10))
    with pytest.raises(ValueError):
        apply(Symbol.identity(t2), c)


def test_extract_round_trip(t2, rng):
    sigma = random_symbol(rng, t2)
    back = extract(lambda c: apply(sigma, c), t2)
    for a, b in zip(back.blocks, sigma.blocks):
        np.testing.assert_array_equal(a, b)


def test_extract_spectral_action():
    p = enumerate_partition("torus3", 6)
    lam = np.repeat(p.lambdas, p.dims)
    back = extract(lambda c: FourierCoefficients(p, np.exp(-lam) * c.data), p)
    for lv, b in zip(p.levels, back.blocks):
        np.testing.assert_allclose(b, math.exp(-lv.lam) * np.eye(lv.dim), rtol=1e-15)


def test_extract_rejects_wrong_shape(t2):
    with pytest.raises(ValueError):
        extract(lambda c: c.data[:-1], t2)


def test_multiplication_operator_is_not_invariant(rng):
    p = enumerate_partition("torus1", 9)
    grid = build_quadrature(p, band_limit=49)
    g = 1 + 0.5 * np.cos(2 * np.pi * grid.nodes[:, 0])
    rep = check_invariance(grid_operator(lambda v: g * v, p, grid), p)
    assert not rep.verdict
    # off-block coefficient <g e_j, e_{j+1}> = 1/4
    assert rep.max_offblock == pytest.approx(0.25, abs=1e-12)


# --- invariance ------------------------------------------------------------


def test_symbol_operator_invariant(t2, rng):
    sigma = random_symbol(rng, t2)
    rep = check_invariance(lambda c: apply(sigma, c), t2)
    assert rep.verdict and rep.max_offblock < 1e-12
    for a, b in zip(rep.extracted.blocks, sigma.blocks):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("shift", [(0.25, 0.5), (0.137, 0.71)])
def test_torus_translation_invariant(t2, shift):
    grid = build_quadrature(t2)
    rep = check_invariance(grid_operator(torus_translation(grid, shift), t2, grid), t2)
    assert rep.verdict
    # symbol of f -> f(. - a) is exp(-2 pi i j.a) on the diagonal
    for lv, b in zip(t2.levels, rep.extracted.blocks):
        phases = [np.exp(-2j * np.pi * np.dot(j, shift)) for j in lv.labels]
        np.testing.assert_allclose(b, np.diag(phases), atol=1e-12)


def test_character_multiplication_not_invariant(t2):
    grid = build_quadrature(t2, band_limit=(math.sqrt(20) + 1) ** 2)
    rep = check_invariance(grid_operator(character_multiplication(grid, (1, 0)), t2, grid), t2)
    assert not rep.verdict
    assert rep.max_offblock == pytest.approx(1.0, abs=1e-12)


def test_tolerance_must_be_positive(t2):
    with pytest.raises(ValueError):
        check_invariance(lambda c: c, t2, tol=0)


def test_basis_change_invariance(t2, rng):
    sigma = random_symbol(rng, t2)
    us = [random_unitary(rng, d) for d in t2.dims]
    rot = conjugate(sigma, us)
    rep = check_invariance(lambda c: apply(rot, c), t2)
    assert rep.verdict
    for r in (0.5, 1.0, 2.0):
        assert schatten(rot, r).value == pytest.approx(schatten(sigma, r).value, rel=1e-10)
    assert l2_bound(rot) == pytest.approx(l2_bound(sigma), rel=1e-10)


# --- composition and bounds ------------------------------------------------


def test_compose_identity_and_spectral(t2, rng):
    sigma = random_symbol(rng, t2)
    same = compose(Symbol.identity(t2), sigma)
    for a, b in zip(same.blocks, sigma.blocks):
        np.testing.assert_array_equal(a, b)
    F = from_spectral_function(t2, lambda x: 1 / (1 + x))
    G = from_spectral_function(t2, lambda x: x**2 - 3)
    FG = from_spectral_function(t2, lambda x: (x**2 - 3) / (1 + x))
    for a, b in zip(compose(F, G).blocks, FG.blocks):
        np.testing.assert_allclose(a, b, rtol=1e-14)


def test_compose_associates_with_apply(t2, rng):
    a, b = random_symbol(rng, t2), random_symbol(rng, t2)
    c = random_coeffs(rng, t2)
    lhs = apply(compose(a, b), c).data
    rhs = apply(a, apply(b, c)).data
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.abs(rhs).max())


def test_compose_power_exponents_add(t2):
    s = compose(power_symbol(t2, 2), power_symbol(t2, 3))
    assert s.power == Fraction(-5, 2)


def test_l2_bound_examples(t2, rng):
    assert l2_bound(Symbol.identity(t2)) == 1
    assert l2_bound(from_spectral_function(t2, lambda x: 1 / (1 + x))) == 1
    sigma = random_symbol(rng, t2)
    assert l2_bound(sigma) == pytest.approx(op_norm(assemble(sigma)), rel=1e-10)


def test_schatten_identity_torus1():
    p = enumerate_partition("torus1", 4)
    assert schatten(Symbol.identity(p), 1).value == 5


def test_schatten_three_level_support_matches_dense(t2, rng):
    blocks = [np.zeros((d, d), dtype=complex) for d in t2.dims]
    for i in (1, 3, 4):
        blocks[i] = random_matrix(rng, t2.dims[i])
    sigma = Symbol(t2, tuple(blocks))
    dense = assemble(sigma)
    for r in (0.5, 1.0, 2.0):
        assert schatten(sigma, r).value == pytest.approx(schatten_q(dense, r), rel=1e-10)


def test_schatten_index_validated(t2):
    with pytest.raises(ValueError):
        schatten(Symbol.identity(t2), 0)
    with pytest.raises(ValueError):
        schatten(Symbol.identity(t2), -2)


def test_schatten_monotone_in_truncation(rng):
    big = enumerate_partition("torus2", 30)
    sigma = random_symbol(rng, big)
    prev = 0.0
    for cut in (0, 2, 5, 10, 20, 30):
        p = enumerate_partition("torus2", cut)
        sub = Symbol(p, sigma.blocks[: len(p)])
        val = schatten(sub, 0.7).value
        assert val >= prev
        prev = val


def test_schatten_tail_classification():
    p = enumerate_partition("torus2", 50)
    assert schatten(power_symbol(p, 3), 1).tail.verdict == "convergent"
    assert schatten(power_symbol(p, 2), 1).tail.verdict == "divergent"
    assert schatten(power_symbol(p, 1.5), 1).tail.analytic


def test_lp_norm_endpoints(t2, rng):
    sigma = random_symbol(rng, t2)
    assert lp_norm(sigma, math.inf) == l2_bound(sigma)
    assert lp_norm(sigma, 2) == pytest.approx(np.linalg.norm(assemble(sigma)), rel=1e-12)


# --- trace -----------------------------------------------------------------


def test_trace_identity(t2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SlowDecayWarning)
        assert trace_formula(Symbol.identity(t2)) == t2.total_dim


def test_trace_rank_one_single_level(t2, rng):
    blocks = [np.zeros((d, d), dtype=complex) for d in t2.dims]
    u, v = random_matrix(rng, 4, 1), random_matrix(rng, 1, 4)
    blocks[2] = u @ v
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SlowDecayWarning)
        tr = trace_formula(Symbol(t2, tuple(blocks)))
    assert tr == pytest.approx(mat_trace(u @ v), rel=1e-14)


def test_trace_slow_decay_warning(t2):
    with pytest.warns(SlowDecayWarning):
        trace_formula(Symbol.identity(t2))
    p = enumerate_partition("torus2", 400)
    with warnings.catch_warnings():
        warnings.simplefilter("error", SlowDecayWarning)
        trace_formula(power_symbol(p, 8))


def test_trace_matches_dense(t2, rng):
    sigma = random_symbol(rng, t2, decay=3)
    assert trace_formula(sigma) == pytest.approx(mat_trace(assemble(sigma)), abs=1e-12)


# --- Sobolev order ---------------------------------------------------------


@pytest.fixture(scope="module")
def t2big():
    return enumerate_partition("torus2", 200)


def test_sobolev_power_one(t2big):
    so = sobolev_order(power_symbol(t2big, -2))  # (1 + lambda)^1
    assert so.m_est == pytest.approx(2, abs=0.05)
    assert so.C_est == pytest.approx(1, rel=1e-6)


def test_sobolev_identity_and_half(t2big):
    assert sobolev_order(Symbol.identity(t2big)).m_est == pytest.approx(0, abs=0.05)
    half = from_spectral_function(t2big, lambda x: (1 + x) ** 0.5)
    assert sobolev_order(half).m_est == pytest.approx(1, abs=0.05)


def test_sobolev_errors():
    with pytest.raises(ValueError):
        sobolev_order(Symbol.identity(enumerate_partition("torus1", 25)))
    p = enumerate_partition("torus2", 100)
    with pytest.raises(ValueError):
        sobolev_order(Symbol.zeros(p))


# --- power recognition ----------------------------------------------------


def test_recognize_power(t2):
    s = from_spectral_function(t2, lambda x: (1 + x) ** -1.25)
    assert recognize_power(s) == Fraction(-5, 4)
    assert recognize_power(from_spectral_function(t2, lambda x: math.exp(-x))) is None
    assert recognize_power(Symbol(t2, tuple(np.diag(np.arange(1, d + 1)) for d in t2.dims))) is None


# --- properties ------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["torus1", "torus2", "su2"]), st.floats(0.3, 3.0))
def test_block_diagonal_equivalence_property(seed, name, r):
    rng = np.random.default_rng(seed)
    p = enumerate_partition(name, 6)
    sigma = random_symbol(rng, p)
    dense = assemble(sigma)
    # the restriction matrices are the transposes; norms and traces agree either way
    dense_t = np.zeros_like(dense)
    for i in range(len(p)):
        dense_t[p.slice(i), p.slice(i)] = sigma[i].T
    for m in (dense, dense_t):
        assert l2_bound(sigma) == pytest.approx(op_norm(m), rel=1e-10)
        assert schatten(sigma, r).value == pytest.approx(schatten_q(m, r), rel=1e-10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SlowDecayWarning)
        assert abs(trace_formula(sigma) - mat_trace(dense_t)) <= 1e-10 * np.abs(dense).sum()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_extract_apply_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    p = enumerate_partition("su2", 2)
    sigma = random_symbol(rng, p)
    back = extract(lambda c: apply(sigma, c), p)
    for a, b in zip(back.blocks, sigma.blocks):
        np.testing.assert_allclose(a, b, atol=1e-12)

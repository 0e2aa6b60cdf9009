import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmsverify.errors import ConvergenceError, DomainError
from hmsverify.lattice_theta import (
    basis_values, characteristics, make_modular_param, mult_by_theta_matrix,
    mult_structure_constants, quasi_periodicity_residual, sample_points, structure_residual,
    theta_basis, theta_eval)

import oracles

P02 = make_modular_param(0.2)
UNIT = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def test_weights():
    assert P02.weight((1, 0)) == pytest.approx(0.2)
    assert P02.weight((1, 1)) == pytest.approx(0.008)
    assert P02.weight((0, 0)) == 1.0


@pytest.mark.parametrize("t", [0.0, 1.0, -0.5, 2.0])
def test_bad_modular_param(t):
    with pytest.raises(DomainError):
        make_modular_param(t)


def test_q_positive_definite():
    assert sorted(np.linalg.eigvalsh(P02.Q)) == pytest.approx([1.0, 3.0])


@given(st.integers(-6, 6), st.integers(-6, 6))
def test_weight_symmetric(a, b):
    assert P02.weight((a, b)) == P02.weight((-a, -b))


@given(st.integers(1, 8), st.integers(-3, 3), st.integers(-3, 3))
def test_weight_decreases_along_rays(r, a, b):
    if (a, b) == (0, 0):
        return
    near, far = P02.weight((r * a, r * b)), P02.weight(((r + 1) * a, (r + 1) * b))
    assert far < near or far == near == 0.0  # both may underflow


def test_basis_ordering():
    b = theta_basis(3)
    assert len(b.characteristics) == 9
    assert list(b.characteristics) == sorted(b.characteristics)


def test_value_at_one_matches_brute_force():
    v = theta_eval(P02, 1, (0, 0), (1, 1), R=10)
    ref = oracles.brute_theta(0.2, 1, (0, 0), (1, 1), 30)
    assert v.value.real > 1
    assert abs(v.value - ref) <= v.abs_error_bound + 1e-13
    assert ref.real == pytest.approx(oracles.THETA_0_T02, abs=1e-9)


def test_truncation_self_consistent():
    lo = theta_eval(P02, 1, (0, 0), (1, 1), R=2)
    hi = theta_eval(P02, 1, (0, 0), (1, 1), R=20)
    assert abs(lo.value - hi.value) <= lo.abs_error_bound


@pytest.mark.parametrize("k,c", [(1, (0, 0)), (2, (1, 0)), (3, (2, 1))])
def test_matches_independent_sum(k, c):
    x = (0.8 * np.exp(0.3j), 1.1 * np.exp(-1.2j))
    got = theta_eval(P02, k, c, x, R=6).value
    assert got == pytest.approx(oracles.brute_theta(0.2, k, c, x, 6), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-3.1, 3.1), st.floats(-3.1, 3.1))
def test_inversion_symmetry(r1, r2, a1, a2):
    x = (r1 * np.exp(1j * a1), r2 * np.exp(1j * a2))
    v = theta_eval(P02, 1, (0, 0), x).value
    w = theta_eval(P02, 1, (0, 0), (1 / x[0], 1 / x[1])).value
    assert abs(v - w) <= 1e-12 * max(1.0, abs(v))


def test_deterministic():
    x = (0.7 + 0.2j, 1.3 - 0.4j)
    assert theta_eval(P02, 2, (1, 1), x).value == theta_eval(P02, 2, (1, 1), x).value


def test_convergence_error_far_from_torus():
    with pytest.raises(ConvergenceError):
        theta_eval(P02, 1, (0, 0), (1e30, 1.0), R=1)


def test_zero_point_rejected():
    with pytest.raises(DomainError):
        theta_eval(P02, 1, (0, 0), (0, 1))


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("m", UNIT)
def test_quasi_periodicity(k, m):
    for x in sample_points(3, seed=5):
        for c in characteristics(k):
            assert quasi_periodicity_residual(P02, k, c, tuple(x), R=15, m=m) < 1e-9


def test_wrong_cocycle_power_is_detected():
    # the level-2 theta does not transform with the level-1 factor
    x = tuple(sample_points(1, seed=2)[0])
    ok = quasi_periodicity_residual(P02, 2, (0, 0), x, R=15)
    bad_value = theta_eval(P02, 2, (0, 0), x, R=15).value
    from hmsverify.lattice_theta import cocycle, translate
    moved = theta_eval(P02, 2, (0, 0), translate(P02, x, (1, 0)), R=15).value
    bad = abs(moved - cocycle(P02, x, (1, 0)) * bad_value) / abs(bad_value)
    assert ok < 1e-9 < bad


def test_theta_squared_structure_constants():
    A = mult_structure_constants(P02, 1, 1)
    assert A.shape == (1, 1, 4)
    assert A.residual < 1e-9
    np.testing.assert_allclose(A.data[0, 0].real, oracles.THETA_SQUARED_T02, atol=1e-9)
    assert structure_residual(P02, A, 1, 1, sample_points(20, seed=77)) < 1e-9


@pytest.mark.parametrize("k1,k2", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_structure_constants_match_addition_formula(k1, k2):
    A = mult_structure_constants(P02, k1, k2).data
    ref = np.array(oracles.addition_formula(0.2, k1, k2))
    assert np.max(np.abs(A - ref)) < 1e-9


def test_structure_constants_cached_and_read_only():
    a = mult_structure_constants(P02, 1, 2)
    assert a is mult_structure_constants(P02, 1, 2)
    with pytest.raises(ValueError):
        a.data[0, 0, 0] = 0


def test_level_zero_is_identity():
    A = mult_structure_constants(P02, 0, 2).data
    assert A.shape == (1, 4, 4)
    np.testing.assert_array_equal(A[0], np.eye(4))


def test_mult_by_theta_matrices():
    M1 = mult_by_theta_matrix(P02, 1)
    assert M1.shape == (4, 1)
    np.testing.assert_allclose(M1[:, 0], mult_structure_constants(P02, 1, 1).data[0, 0])
    assert np.linalg.matrix_rank(M1) == 1
    M2 = mult_by_theta_matrix(P02, 2)
    assert M2.shape == (9, 4)
    assert np.linalg.matrix_rank(M2, tol=1e-9 * np.linalg.norm(M2, 2)) == 4


def test_basis_values_shape_and_tail():
    V, tail = basis_values(P02, 2, sample_points(5))
    assert V.shape == (5, 4)
    assert 0 <= tail < 1e-20


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([0.1, 0.2, 0.3]), st.sampled_from(list(itertools.product([1, 2], repeat=3))))
def test_associativity(t, levels):
    p = make_modular_param(t)
    a, b, c = levels
    L = np.einsum("pqe,erf->pqrf", mult_structure_constants(p, a, b).data,
                  mult_structure_constants(p, a + b, c).data)
    R = np.einsum("qre,pef->pqrf", mult_structure_constants(p, b, c).data,
                  mult_structure_constants(p, a, b + c).data)
    assert np.max(np.abs(L - R)) <= 1e-8 * np.max(np.abs(L))


def test_commutativity():
    A = mult_structure_constants(P02, 1, 2).data
    B = mult_structure_constants(P02, 2, 1).data
    assert np.max(np.abs(A - B.transpose(1, 0, 2))) < 1e-10

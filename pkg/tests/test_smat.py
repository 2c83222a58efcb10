import random

import pytest
from hypothesis import given, strategies as st

from abelsheaf.examples import StandardModuleSpec, formal_standard
from abelsheaf.gf import FqElement, artin_schreier_solve, make_field
from abelsheaf.series import TruncSeries
from abelsheaf.smat import (SemilinearSystem, SigmaMatrix, compose, det, exterior_power,
                            linearize_semilinear, mat_mul, mat_sigma, power, series_identity,
                            sigma_det, solve_semilinear)
from oracles import det_perm, semilinear_solutions_by_exhaustion

F2, F4 = make_field(2), make_field(2, 2)
A, A2 = 2, 3  # alpha and alpha^2 = alpha + 1 in F_4


def S(F, coeffs, val=0):
    return TruncSeries(F, val, coeffs)


def mat(F, rows):
    return tuple(tuple(S(F, c) if isinstance(c, list) else S(F, [c]) for c in r) for r in rows)


def n_plus_z(F, N):
    return tuple(tuple(S(F, [N[i][j], 1 if i == j else 0]) for j in range(2)) for i in range(2))


def test_compose_identity_twists_add():
    I = series_identity(F2, 2)
    M = compose(SigmaMatrix(I, 1, 2), SigmaMatrix(I, 1, 2))
    assert M.twist == 2 and M.A == I


def test_compose_irrational_kernel_square():
    U = n_plus_z(F4, [[A, 1], [A2, A]])
    M = power(SigmaMatrix(U, 1, 2), 2)
    expected = mat(F4, [[[A2, 1, 1], [1, 0]], [[1, 1], [A, 1, 1]]])
    assert M.twist == 2 and M.A == expected


def test_compose_rational_nilpotent_square():
    U = n_plus_z(F2, [[0, 1], [0, 0]])
    M = power(SigmaMatrix(U, 1, 2), 2)
    assert M.A == mat(F2, [[[0, 0, 1], 0], [0, [0, 0, 1]]])


def test_power_zero_and_five():
    I = series_identity(F2, 3)
    assert power(SigmaMatrix(I, 1, 2), 5).twist == 5
    P0 = power(SigmaMatrix(I, 1, 2), 0)
    assert P0.twist == 0 and P0.A == I


def test_power_of_formal_standard():
    M = formal_standard(StandardModuleSpec(1, 2, 1, 2))
    P = power(M.F, 2)
    z = S(M.field, [1], 1)
    assert P.twist == 2
    assert P.A == tuple(tuple(z if i == j else S(M.field, []) for j in range(4)) for i in range(4))


def test_power_of_v_one_half():
    U = mat(F2, [[0, [0, 1]], [1, 0]])
    P = power(SigmaMatrix(U, 1, 2), 2)
    assert P.A == mat(F2, [[[0, 1], 0], [0, [0, 1]]])


def test_exterior_power_extremes():
    U = n_plus_z(F4, [[A, 1], [A2, A]])
    M = SigmaMatrix(U, 1, 2)
    assert exterior_power(M, 1).A == U
    top = exterior_power(M, 2)
    assert top.A == ((S(F4, [1], 2),),) and top.twist == 1


def test_linearize_identity_system_unique():
    F = F4
    B = [[3], [2]]
    sol = solve_semilinear(SemilinearSystem(F, 2, [[1, 0], [0, 1]], [[0, 0], [0, 0]], B))
    assert sol.dimension == 0 and sol.particular_matrix() == B


def test_sigma_is_injective():
    sol = solve_semilinear(SemilinearSystem(F4, 2, [[0]], [[1]], [[0]]))
    assert sol.dimension == 0 and sol.particular_matrix() == [[0]]


def test_x_plus_x_squared_equals_one_has_no_solution_over_f2():
    # x - x^2 = 1 over F_2
    sol = solve_semilinear(SemilinearSystem(F2, 2, [[1]], [[1]], [[1]]))
    assert sol.is_empty
    assert semilinear_solutions_by_exhaustion(F2, 2, [[1]], [[1]], [1]) == []


@pytest.mark.parametrize("p,e,g", [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 4, 2)])
def test_lang_system_reproduces_artin_schreier(p, e, g):
    F = make_field(p, e)
    q = p ** g
    for b in range(F.order):
        # u^q - u + b = 0  <=>  u - u^q = b
        sol = solve_semilinear(SemilinearSystem(F, q, [[1]], [[1]], [[b]]))
        sols, ext = artin_schreier_solve(FqElement(F, b), q)
        if ext:
            assert sol.is_empty
        else:
            assert sorted(X[0][0] for X in sol.elements()) == [u.v for u in sols]


def _rand_int_matrix(F, m, n, rng):
    return [[rng.randrange(F.order) for _ in range(n)] for _ in range(m)]


@given(st.sampled_from([(2, 2, 1), (3, 2, 1), (2, 3, 1), (2, 4, 2)]), st.integers(0, 10 ** 6))
def test_construct_then_solve_recovers_x(pfg, seed):
    p, e, g = pfg
    F, q = make_field(p, e), p ** g
    rng = random.Random(seed)
    C, D = _rand_int_matrix(F, 2, 2, rng), _rand_int_matrix(F, 2, 2, rng)
    X = _rand_int_matrix(F, 2, 2, rng)
    sys0 = SemilinearSystem(F, q, C, D, [[0, 0], [0, 0]])
    R = sys0.apply(X)
    sol = solve_semilinear(SemilinearSystem(F, q, C, D, R))
    assert sol.contains(X)
    assert sys0.apply(sol.particular_matrix()) == R
    for K in sol.kernel_matrices():
        assert sys0.apply(K) == [[0, 0], [0, 0]]


@given(st.sampled_from([(2, 2, 1), (3, 1, 1), (2, 3, 1), (3, 2, 1)]), st.integers(0, 10 ** 6))
def test_solution_count_matches_exhaustion(pfg, seed):
    p, e, g = pfg
    F, q = make_field(p, e), p ** g
    rng = random.Random(seed)
    C, D = _rand_int_matrix(F, 2, 2, rng), _rand_int_matrix(F, 2, 2, rng)
    R = [rng.randrange(F.order), rng.randrange(F.order)]
    brute = semilinear_solutions_by_exhaustion(F, q, C, D, R)
    sol = solve_semilinear(SemilinearSystem(F, q, C, D, [[x] for x in R]))
    n = 0 if sol.is_empty else p ** sol.dimension
    assert n == len(brute)
    assert sorted(tuple(r[0] for r in X) for X in sol.elements()) == sorted(map(tuple, brute))


def test_linearization_shape():
    A_, b = linearize_semilinear(SemilinearSystem(F4, 2, [[1, 0]], [[0, 1]], [[1]]))
    assert A_.shape == (2, 4) and list(b) == [1, 0]


# -- random SigmaMatrix properties --------------------------------------------


def _rand_series_matrix(F, r, rng, deg=2):
    return tuple(tuple(S(F, [rng.randrange(F.order) for _ in range(deg + 1)]) for _ in range(r))
                 for _ in range(r))


@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(0, 2), st.integers(0, 2),
       st.integers(0, 2))
def test_compose_associative(seed, r, s1, s2, s3):
    rng = random.Random(seed)
    M = [SigmaMatrix(_rand_series_matrix(F4, r, rng), s, 2) for s in (s1, s2, s3)]
    assert compose(compose(M[0], M[1]), M[2]) == compose(M[0], compose(M[1], M[2]))


@given(st.integers(0, 10 ** 6), st.integers(0, 4), st.integers(0, 4))
def test_power_additive(seed, a, b):
    rng = random.Random(seed)
    M = SigmaMatrix(_rand_series_matrix(F4, 2, rng, 1), 1, 2)
    assert power(M, a + b) == compose(power(M, a), power(M, b))


@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(0, 2))
def test_det_of_composite(seed, r, s1):
    rng = random.Random(seed)
    M1 = SigmaMatrix(_rand_series_matrix(F4, r, rng), s1, 2)
    M2 = SigmaMatrix(_rand_series_matrix(F4, r, rng), 1, 2)
    lhs = det(compose(M1, M2).A)
    rhs = det(M1.A) * det(mat_sigma(M2.A, 2, s1)) if r else None
    assert lhs == rhs
    assert sigma_det(M1).A[0][0] == det(M1.A)


@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_det_matches_permutation_expansion(seed, r):
    rng = random.Random(seed)
    U = _rand_series_matrix(make_field(3, 2), r, rng)
    F = U[0][0].field
    assert det(U) == det_perm(U, S(F, []), S(F, [1]))


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_exterior_power_multiplicative(seed, j):
    rng = random.Random(seed)
    M1 = SigmaMatrix(_rand_series_matrix(F4, 3, rng, 1), 1, 2)
    M2 = SigmaMatrix(_rand_series_matrix(F4, 3, rng, 1), 1, 2)
    assert exterior_power(compose(M1, M2), j) == compose(exterior_power(M1, j), exterior_power(M2, j))


def test_mat_mul_matches_definition():
    U = n_plus_z(F4, [[A, 1], [A2, A]])
    V = mat_sigma(U, 2)
    P = mat_mul(U, V)
    for i in range(2):
        for j in range(2):
            assert P[i][j] == U[i][0] * V[0][j] + U[i][1] * V[1][j]

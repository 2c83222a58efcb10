import random

import pytest
from hypothesis import assume, given, strategies as st

from abelsheaf.dvr import mat_inverse, same_lattice, smith_exponents, valuation_of_det
from abelsheaf.errors import InsufficientPrecision
from abelsheaf.gf import make_field
from abelsheaf.series import TruncSeries
from abelsheaf.smat import det, mat_equal, mat_mul, series_identity
from oracles import smith_exponents_by_minors

F2, F4, F9 = make_field(2), make_field(2, 2), make_field(3, 2)


def S(F, coeffs, val=0):
    return TruncSeries(F, val, coeffs)


def test_diagonal_exponents_sorted():
    U = ((S(F2, [1], 3), S(F2, [])), (S(F2, []), S(F2, [1])))
    assert smith_exponents(U) == [0, 3]


def test_companion_with_z_corner():
    U = ((S(F2, []), S(F2, [0, 1])), (S(F2, [1]), S(F2, [])))
    assert smith_exponents(U) == [0, 1]


def test_singular_matrix_cannot_be_certified():
    # a zero remainder at finite precision never certifies a drop in rank
    U = ((S(F2, [1]), S(F2, [1])), (S(F2, [1]), S(F2, [1])))
    with pytest.raises(InsufficientPrecision):
        smith_exponents(U)


def test_inverse_of_unipotent():
    U = ((S(F4, [1]), S(F4, [0, 2])), (S(F4, []), S(F4, [1])))
    inv = mat_inverse(U)
    assert mat_equal(mat_mul(U, inv), series_identity(F4, 2))


def test_same_lattice_under_unimodular_change():
    X = ((S(F2, [0, 1]), S(F2, [])), (S(F2, []), S(F2, [1])))
    W = ((S(F2, [1, 1]), S(F2, [1])), (S(F2, [1]), S(F2, [0, 1])))  # det 1 + z + z^2... unit
    assert same_lattice(X, mat_mul(X, W))
    Y = ((S(F2, [1]), S(F2, [])), (S(F2, []), S(F2, [0, 1])))
    assert not same_lattice(X, Y)


def _rand(F, r, c, rng, deg=3):
    return tuple(tuple(S(F, [rng.randrange(F.order) if rng.random() < 0.6 else 0
                             for _ in range(deg + 1)], rng.randint(0, 1)) for _ in range(c))
                 for _ in range(r))


@given(st.sampled_from([F2, F4, F9]), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_exponents_match_determinantal_divisors(F, r, c, seed):
    A = _rand(F, r, c, random.Random(seed))
    ref = smith_exponents_by_minors(A, S(F, []), S(F, [1]))
    assume(len(ref) == min(r, c))
    assert smith_exponents(A) == ref


@given(st.sampled_from([F2, F4, F9]), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_inverse_and_det_valuation(F, r, seed):
    A = _rand(F, r, r, random.Random(seed))
    D = det(A)
    assume(D.coeffs)
    assert valuation_of_det(A) == D.val
    inv = mat_inverse(A, prec=20)
    prod = mat_mul(A, inv)
    for i in range(r):
        for j in range(r):
            d = prod[i][j] - (S(F, [1]) if i == j else S(F, []))
            assert d.is_zero()

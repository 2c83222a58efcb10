import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from abelsheaf.examples import StandardModuleSpec, formal_standard
from abelsheaf.gf import embed, make_field
from abelsheaf.isocrystal import (DieudonneModule, Isocrystal, certified_invertible,
                                  check_isogeny_relation, classify, find_invertible,
                                  hodge_newton_ok, hodge_polygon, is_isoclinic, is_normalized,
                                  isoclinic_normalize, isogeny_solve, newton_oracle,
                                  newton_polygon, validate)
from abelsheaf.polygon import SlopeMultiset, is_straight_line, lies_above
from abelsheaf.series import TruncSeries
from abelsheaf.smat import (block_diag, det, mat_equal, mat_mul, mat_sigma, series_identity)
from abelsheaf.dvr import mat_inverse
from randmod import random_matrix, random_module

F2, F4 = make_field(2), make_field(2, 2)
A, A2 = 2, 3


def S(F, coeffs, val=0):
    return TruncSeries(F, val, coeffs)


def z_id(F, r, k=1):
    return tuple(tuple(S(F, [1], k) if i == j else S(F, []) for j in range(r)) for i in range(r))


def V(F, m, n):
    """Companion matrix of slope m/n: ones below the diagonal, z^m in the corner."""
    return tuple(tuple(S(F, [1], m) if (i == 0 and j == n - 1) else
                       (S(F, [1]) if i == j + 1 else S(F, [])) for j in range(n)) for i in range(n))


def n_plus_z(F, N):
    return tuple(tuple(S(F, [N[i][j], 1 if i == j else 0]) for j in range(2)) for i in range(2))


def module(F, q, U, d=None):
    return DieudonneModule(F, q, U, det(U).val if d is None else d)


IRRATIONAL = n_plus_z(F4, [[A, 1], [A2, A]])
RATIONAL = n_plus_z(F4, [[0, 1], [0, 0]])


# -- validate and hodge ------------------------------------------------------


def test_validate_z_identity():
    rep = validate(module(F2, 2, z_id(F2, 2), 2))
    assert rep["exponents"] == [1, 1] and rep["sum"] == 2 and rep["valid"]


def test_validate_v_one_half():
    rep = validate(module(F2, 2, V(F2, 1, 2), 1))
    assert rep["exponents"] == [0, 1] and rep["valid"]


def test_validate_detects_dimension_mismatch():
    U = ((S(F2, [1]), S(F2, [])), (S(F2, []), S(F2, [1], 3)))
    rep = validate(module(F2, 2, U, 2))
    assert rep["sum"] == 3 and not rep["valid"]
    assert not rep["conditions"]["coker_rank_d"] and not rep["conditions"]["annihilated"]


def test_validate_unit_characteristic_needs_trivial_cokernel():
    M = DieudonneModule(F2, 2, z_id(F2, 1), 1, zeta=None)
    assert validate(M)["valid"]
    from abelsheaf.series import CharValue
    M1 = DieudonneModule(F2, 2, z_id(F2, 1), 1, zeta=CharValue(F2, 1))
    assert not validate(M1)["conditions"]["annihilated"]


def test_hodge_examples():
    assert hodge_polygon(module(F2, 2, z_id(F2, 2))).slopes() == [1, 1]
    assert hodge_polygon(module(F2, 2, V(F2, 1, 2))).slopes() == [0, 1]
    M = formal_standard(StandardModuleSpec(1, 2, 1, 2))
    assert M.rank == 4 and M.dim == 2
    assert hodge_polygon(M).slopes() == [0, 0, 1, 1]


# -- newton, classify, oracle ------------------------------------------------


def test_newton_z_identity():
    P = newton_polygon(module(F2, 2, z_id(F2, 2)))
    assert P.slopes() == [1, 1] and P.certified
    assert is_isoclinic(module(F2, 2, z_id(F2, 2)))


def test_newton_irrational_kernel():
    M = module(F4, 2, IRRATIONAL)
    assert newton_polygon(M).slopes() == [0, 2]
    assert not is_isoclinic(M)
    assert classify(M).to_json() == [[0, 1, 1], [2, 1, 1]]


def test_newton_formal_standard():
    M = formal_standard(StandardModuleSpec(1, 2, 1, 2))
    P = newton_polygon(M)
    assert is_straight_line(P) and P.breaks[-1] == (4, 2) and P.certified
    assert is_isoclinic(M)


def test_classify_v_one_half():
    S_ = classify(module(F2, 2, V(F2, 1, 2)))
    assert S_.to_json() == [[1, 2, 1]]


def test_classify_direct_sum_of_v0_and_v1():
    U = block_diag(V(F2, 0, 1), V(F2, 1, 1))
    assert classify(module(F2, 2, U)).to_json() == [[0, 1, 1], [1, 1, 1]]


def test_newton_negative_valuation_isocrystal():
    M = Isocrystal(F2, 2, z_id(F2, 2, -1))
    assert newton_polygon(M).slopes() == [-1, -1]


@pytest.mark.parametrize("U,F,slopes", [(z_id(F2, 2), F2, [1, 1]),
                                        (V(F2, 1, 2), F2, [Fraction(1, 2)] * 2),
                                        (IRRATIONAL, F4, [0, 2])])
def test_oracle_examples(U, F, slopes):
    for depth in (None, 4):
        P = newton_oracle(module(F, 2, U), depth)
        assert P.certified and P.slopes() == slopes


def test_hodge_below_newton_on_irrational():
    assert hodge_newton_ok(module(F4, 2, IRRATIONAL))


# -- normalisation -----------------------------------------------------------


@pytest.mark.parametrize("U,F", [(z_id(F2, 2), F2), (V(F2, 1, 2), F2)])
def test_normalize_fixed_points(U, F):
    M = module(F, 2, U)
    assert is_normalized(M)
    Mn, B = isoclinic_normalize(M)
    assert mat_equal(B, series_identity(F, 2))
    assert mat_equal(Mn.U, M.U)


def _unimodular(F, rng):
    a, b, c = (S(F, [F.random_element(rng), F.random_element(rng)]) for _ in range(3))
    one = S(F, [1])
    # (1 a; 0 1)(1 0; b 1) times diag(1, 1 + z c)
    L = ((one, a), (S(F, []), one))
    R = ((one, S(F, [])), (b, one))
    D = ((one, S(F, [])), (S(F, []), one + S(F, [0, 1]) * c))
    return mat_mul(mat_mul(L, R), D)


@pytest.mark.parametrize("seed", range(6))
def test_normalize_recovers_scalar_lattice(seed):
    rng = random.Random(seed)
    W = _unimodular(F4, rng)
    B = mat_mul(W, ((S(F4, [1]), S(F4, [])), (S(F4, []), S(F4, [1], 1))))
    Up = mat_mul(mat_mul(mat_inverse(B, 30), z_id(F4, 2)), mat_sigma(B, 2))
    M = DieudonneModule(F4, 2, Up, 2, prec=24)
    assert newton_polygon(M).slopes() == [1, 1]
    Mn, C = isoclinic_normalize(M)
    assert is_normalized(Mn)
    assert mat_equal(mat_mul(C, Mn.U), mat_mul(Up, mat_sigma(C, 2)))


def test_normalize_rejects_non_isoclinic():
    with pytest.raises(ValueError):
        isoclinic_normalize(module(F4, 2, IRRATIONAL))


# -- isogeny solving ---------------------------------------------------------


def test_isogeny_self_contains_identity():
    M = module(F4, 2, IRRATIONAL)
    space = isogeny_solve(M, M, 0, prec=8)
    I = series_identity(F4, 2)
    assert space.contains(I)
    assert space.dimension >= 1


def test_isogeny_contains_sigma_fixed_change_of_basis():
    rng = random.Random(3)
    M = module(F4, 2, IRRATIONAL)
    one, zero, z = S(F4, [1]), S(F4, []), S(F4, [0, 1])
    W = ((one, z + one), (zero, one))  # entries over F_2[z]
    Winv = ((one, z + one), (zero, one))
    Up = mat_mul(mat_mul(W, M.U), Winv)
    Mp = module(F4, 2, Up)
    space = isogeny_solve(M, Mp, 0, prec=10)
    assert space.contains(W)
    Phi = space.random_element(rng)
    assert check_isogeny_relation(Phi, M, Mp)


def test_isogeny_rational_nilpotent_to_scalar():
    M = module(F4, 2, RATIONAL)
    Mp = module(F4, 2, z_id(F4, 2))
    space = isogeny_solve(M, Mp, 0, prec=12)
    Phi = find_invertible(space, random.Random(0))
    assert Phi is not None and certified_invertible(Phi)
    assert check_isogeny_relation(Phi, M, Mp)


def test_isogeny_between_different_slopes_is_never_invertible():
    M = module(F4, 2, IRRATIONAL)
    Mp = module(F4, 2, z_id(F4, 2))
    space = isogeny_solve(M, Mp, 0, prec=10)
    assert not any(space.invertibility_flags())


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_solutions_satisfy_relation(seed):
    rng = random.Random(seed)
    M = random_module(rng, max_rank=2, deg=1)
    W = random_matrix(M.field, M.rank, rng, 1)
    Up = mat_mul(mat_mul(W, M.U), mat_sigma(W, M.q)) if M.rank else M.U
    Mp = M.with_matrix(Up)
    space = isogeny_solve(M, Mp, 0, prec=6)
    for Phi in space.basis_matrices()[:4]:
        assert check_isogeny_relation(Phi, M, Mp)


# -- invariance --------------------------------------------------------------


def _sigma_conj(M, W, prec):
    Winv = mat_inverse(W, prec)
    Up = mat_mul(mat_mul(W, M.U), mat_sigma(Winv, M.q))
    return DieudonneModule(M.field, M.q, Up, M.dim, M.zeta, prec)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_classify_invariant_under_unimodular_change(seed):
    rng = random.Random(seed)
    M = random_module(rng, max_rank=2, deg=1)
    if M.rank != 2:
        return
    W = _unimodular(M.field, rng)
    N = M.working_precision()
    assert classify(_sigma_conj(M, W, N)) == classify(M)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_classify_invariant_under_base_extension(seed):
    rng = random.Random(seed)
    M = random_module(rng, max_rank=2, deg=2)
    F = M.field
    if F.order ** 2 > 3 ** 8:
        return
    big = make_field(F.p, 2 * F.e)
    assert classify(M.map_field(embed(F, big))) == classify(M)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_direct_sum_merges_slopes(seed):
    rng = random.Random(seed)
    M1 = random_module(rng, max_rank=2, deg=1)
    M2 = random_module(rng, max_rank=2, deg=1)
    if (M1.field, M1.q) != (M2.field, M2.q):
        M2 = DieudonneModule(M1.field, M1.q, random_matrix(M1.field, 1, rng, 1), 0)
        if not det(M2.U).coeffs:
            return
        M2 = module(M1.field, M1.q, M2.U)
    Msum = module(M1.field, M1.q, block_diag(M1.U, M2.U))
    merged = sorted(newton_polygon(M1).slopes() + newton_polygon(M2).slopes())
    assert newton_polygon(Msum).slopes() == merged


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_hodge_below_newton_and_oracle_agrees(seed):
    M = random_module(random.Random(seed))
    P = newton_polygon(M)
    H = hodge_polygon(M)
    assert lies_above(P, H) and P.breaks[-1] == H.breaks[-1]
    O = newton_oracle(M)
    if O.certified:
        assert O == P
    S_ = SlopeMultiset.from_polygon(P)
    assert S_.rank() == M.rank and S_.dim() == M.dim

import math

import pytest
from hypothesis import given, strategies as st

from abelsheaf.errors import FieldMismatch, InsufficientPrecision
from abelsheaf.gf import make_field
from abelsheaf.series import (INF, CharValue, Poly, TruncSeries, ZetaRing, invert, series_arith,
                              sigma_series, substitute_t_inverse)
from oracles import NaiveField

F2, F3, F4 = make_field(2), make_field(3), make_field(2, 2)
ALPHA = 2  # the class of x in F_4


def S(F, coeffs, val=0, prec=INF):
    return TruncSeries(F, val, coeffs, prec)


def test_one_plus_z_times_one_minus_z():
    a = S(F3, [1, 1], prec=4)
    b = S(F3, [1, 2], prec=4)
    assert a * b == S(F3, [1, 0, 2], prec=4)


def test_add_laurent():
    assert S(F3, [1], -1, 3) + S(F3, [1], 1, 3) == S(F3, [1, 0, 1], -1, 3)


def test_zeta_square_vanishes():
    R = ZetaRing(F3, 2)
    f = Poly(R, [R.one, (0, 2)])  # 1 - zeta t
    assert f * f == Poly(R, [R.one, (0, 1)])


def test_precision_propagation_rules():
    a = S(F2, [1, 1], 0, 5)
    b = S(F2, [1], 2, 4)
    assert (a + b).prec == 4
    assert (a * b).prec == min(0 + 4, 2 + 5)


def test_invert_geometric_series():
    assert invert(S(F2, [1, 1], prec=4)) == S(F2, [1, 1, 1, 1], prec=4)


def test_invert_monomial():
    assert invert(S(F2, [1], 2)) == S(F2, [1], -2)


def test_invert_alpha_plus_z_leading_term():
    inv = S(F4, [ALPHA, 1], prec=5).invert()
    assert inv.val == 0 and inv.coeffs[0] == F4.mul(ALPHA, ALPHA)


def test_invert_known_zero_raises():
    with pytest.raises((InsufficientPrecision, ZeroDivisionError)):
        S(F2, [], 0, 3).invert()


def test_sigma_coefficientwise():
    a = S(F4, [ALPHA, ALPHA])
    a2 = F4.mul(ALPHA, ALPHA)
    assert sigma_series(a, 2) == S(F4, [a2, a2])
    assert sigma_series(a, 2, 2) == a


def test_sigma_fixes_ground_field_series():
    a = S(F3, [1, 2, 0, 1], -1)
    assert a.sigma(3) == a


def test_substitute_t_inverse_examples():
    assert substitute_t_inverse(Poly(F2, [1, 1])) == S(F2, [1, 1], -1)
    assert substitute_t_inverse(Poly(F2, [0, 0, 0, 1])) == S(F2, [1], -3)
    a12 = 3
    s = substitute_t_inverse(Poly(F4, [0, a12]))
    assert s == S(F4, [a12], -1)


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        series_arith(S(F2, [1]), S(F3, [1]), "add")


def test_poly_division_identity():
    a = Poly(F3, [1, 2, 0, 1, 2])
    b = Poly(F3, [2, 0, 1])
    qq, rr = a.divmod(b)
    assert qq * b + rr == a and rr.degree() < b.degree()


def test_poly_taylor_shift_evaluates():
    f = Poly(F3, [1, 2, 1])
    g = f.taylor_shift(2)
    for x in range(3):
        assert g.evaluate(x) == f.evaluate(F3.add(x, 2))


def test_charvalue_value():
    assert CharValue(F3, 2).value == 2
    with pytest.raises(ValueError):
        CharValue.generic(F3, 2).value


# -- properties against a schoolbook oracle ----------------------------------

FIELDS = [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1), (2, 3)]


def _naive_mul(N, a, b):
    """Coefficient dict of the product of two coefficient lists."""
    out = {}
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = N.add(out.get(i + j, 0), N.mul(x, y))
    return out


@st.composite
def series_pair(draw):
    p, e = draw(st.sampled_from(FIELDS))
    F = make_field(p, e)
    el = st.integers(0, F.order - 1)
    a = draw(st.lists(el, min_size=1, max_size=7))
    b = draw(st.lists(el, min_size=1, max_size=7))
    va = draw(st.integers(-3, 3))
    vb = draw(st.integers(-3, 3))
    return F, (p, e), a, va, b, vb


@given(series_pair())
def test_multiplication_matches_schoolbook(data):
    F, pe, a, va, b, vb = data
    N = NaiveField(*pe)
    prod = S(F, a, va) * S(F, b, vb)
    ref = _naive_mul(N, a, b)
    for k, c in ref.items():
        assert prod.coeff(va + vb + k) == c


@given(series_pair(), st.integers(3, 9), st.integers(3, 9))
def test_precision_and_valuation(data, na, nb):
    F, _, a, va, b, vb = data
    x = S(F, a, va, va + na)
    y = S(F, b, vb, vb + nb)
    xy = x * y
    assert xy.prec == min(x.val_lower_bound() + y.prec, y.val_lower_bound() + x.prec)
    if x.coeffs and y.coeffs and x.val + y.val < xy.prec:
        assert xy.val == x.val + y.val


def _agree(a, b):
    n = min(a.prec, b.prec)
    return a.truncate(n) == b.truncate(n)


@given(series_pair(), st.integers(0, 4))
def test_ring_axioms_at_matching_precision(data, c):
    F, _, a, va, b, vb = data
    N = 8
    x, y = S(F, a, va, N), S(F, b, vb, N)
    z = S(F, [1] + [0] * c + [1], 0, N)
    # the two sides may carry different precisions, e.g. O(z^8) * z is O(z^9)
    assert _agree((x * y) * z, x * (y * z))
    assert _agree(x * (y + z), x * y + x * z)


@given(series_pair())
def test_invert_is_inverse(data):
    F, _, a, va, _, _ = data
    x = S(F, a, va, va + 8)
    if not x.coeffs:
        return
    y = x.invert()
    assert y.val == -x.val
    one = x * y
    assert one.coeff(0) == 1 and all(one.coeff(k) == 0 for k in range(1, one.prec))


@given(series_pair())
def test_sigma_is_ring_hom_commuting_with_invert(data):
    F, (p, e), a, va, b, vb = data
    q = p
    x, y = S(F, a, va, va + 6), S(F, b, vb, vb + 6)
    assert (x * y).sigma(q) == x.sigma(q) * y.sigma(q)
    assert (x + y).sigma(q) == x.sigma(q) + y.sigma(q)
    if x.coeffs:
        assert x.invert().sigma(q) == x.sigma(q).invert()


@given(series_pair(), st.integers(2, 5))
def test_higher_precision_agrees_modulo_lower(data, n):
    F, _, a, va, b, vb = data
    lo = S(F, a, va, va + n) * S(F, b, vb, vb + n)
    hi = S(F, a, va, va + 3 * n) * S(F, b, vb, vb + 3 * n)
    assert hi.truncate(lo.prec) == lo


def test_inf_is_math_inf():
    assert INF == math.inf

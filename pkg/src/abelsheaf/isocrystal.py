"""Dieudonne K[[z]]-modules and K((z))-isocrystals given by an F-matrix U
(F = U * sigma): validation, Hodge and Newton polygons, slope
classification, isoclinic normalisation and isogeny solving.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np

from . import dvr, fplinalg
from .errors import InsufficientPrecision
from .polygon import (AtLeast, ConvexPolygon, SlopeMultiset, hull_from_valuations,
                      is_straight_line, lies_above)
from .series import INF, CharValue, TruncSeries
from .smat import (SemilinearSystem, SigmaMatrix, charpoly, compose, exterior_power,
                   linearize_semilinear, mat_mul, mat_precision, mat_shift, mat_sigma,
                   mat_truncate, mat_valuation, power)


class Isocrystal:
    """A K((z))-vector space of rank r with F = U * sigma."""

    def __init__(self, field, q, U, prec=None):
        self.field = field
        self.q = q
        self.U = tuple(tuple(r) for r in U)
        self.rank = len(self.U)
        if any(len(r) != self.rank for r in self.U):
            raise ValueError("F-matrix must be square")
        self.m = field.e // field.ground_degree(q)
        given = mat_precision(self.U)
        self.prec = prec if prec is not None else (given if given != INF else None)

    @property
    def F(self):
        return SigmaMatrix(self.U, 1, self.q)

    def working_precision(self):
        if self.prec is not None:
            return self.prec
        d = max(0, self._dim_estimate())
        return 2 * self.m * self.rank * (d + 1) + 8

    def _dim_estimate(self):
        shift = max(0, -mat_valuation(self.U))
        top = max((a.degree() for r in self.U for a in r if a.coeffs), default=0)
        return int(self.rank * (top + shift))

    def map_field(self, emb):
        U = tuple(tuple(a.map_field(emb) for a in r) for r in self.U)
        return Isocrystal(emb.target, self.q, U, self.prec)

    def __repr__(self):
        return f"Isocrystal(rank={self.rank}, field={self.field!r}, q={self.q})"


class DieudonneModule(Isocrystal):
    """A Dieudonne K[[z]]-module of rank r and dimension d."""

    def __init__(self, field, q, U, dim, zeta=None, prec=None):
        super().__init__(field, q, U, prec)
        self.dim = dim
        self.zeta = zeta if zeta is not None else CharValue.zero(field)

    def working_precision(self):
        if self.prec is not None:
            return self.prec
        return default_precision(self.m, self.rank, self.dim)

    def _dim_estimate(self):
        return self.dim

    def map_field(self, emb):
        U = tuple(tuple(a.map_field(emb) for a in r) for r in self.U)
        return DieudonneModule(emb.target, self.q, U, self.dim, self.zeta.map_field(emb), self.prec)

    def with_matrix(self, U):
        return DieudonneModule(self.field, self.q, U, self.dim, self.zeta, self.prec)

    def __repr__(self):
        return f"DieudonneModule(rank={self.rank}, dim={self.dim}, field={self.field!r}, q={self.q})"


def default_precision(m, r, d):
    return 2 * m * r * (d + 1) + 8


def _smith_precision(M):
    if M.prec is not None:
        return M.prec
    return None


# ---------------------------------------------------------------------------


def validate(M):
    """Check the Dieudonne module conditions at a field point.

    Returns a report dict with the elementary divisor exponents and one
    boolean per condition.
    """
    exps = dvr.smith_exponents(M.U, _smith_precision(M))
    r = M.rank
    full_rank = len(exps) == r
    integral = dvr.is_integral(M.U) and all(e >= 0 for e in exps)
    total = sum(exps)
    zeta0 = M.zeta.coeffs[0]
    if zeta0 == 0:
        # (z - zeta)^d = z^d kills K[[z]]/z^e exactly when e <= d
        annihilated = all(e <= M.dim for e in exps)
    else:
        # z - zeta is a unit, so the cokernel must vanish
        annihilated = all(e == 0 for e in exps)
    conds = {
        "lattice_map": bool(full_rank and integral),
        "coker_rank_d": bool(full_rank and total == M.dim),
        "annihilated": bool(full_rank and annihilated),
    }
    report = {
        "exponents": exps,
        "sum": total,
        "rank": r,
        "dim": M.dim,
        "conditions": conds,
        "valid": all(conds.values()),
    }
    if M.zeta.M > 1:
        report["note"] = "checked at the reduced point zeta mod nilpotents"
    return report


def hodge_polygon(M):
    """Polygon whose slopes are the elementary divisor exponents, ascending."""
    exps = dvr.smith_exponents(M.U, _smith_precision(M))
    if len(exps) != M.rank:
        raise ValueError("F-matrix is singular")
    return ConvexPolygon.from_slopes(exps)


# ---------------------------------------------------------------------------
# Newton polygon via the characteristic polynomial of F^m


def _normalised(M):
    """Shift so that the F-matrix is integral: returns (U', c) with U' = z^c U."""
    c = max(0, -mat_valuation(M.U))
    return (mat_shift(M.U, c) if c else M.U), c


def _newton_at(M, U, N):
    m = M.m
    Ut = mat_truncate(U, N)
    L = power(SigmaMatrix(Ut, 1, M.q), m).A
    cp = charpoly(L)
    r = M.rank
    pts = []
    for i, c in enumerate(cp):
        if c.coeffs:
            pts.append((i, c.val))
        elif c.prec == INF:
            pts.append((i, None))
        else:
            pts.append((i, AtLeast(c.prec)))
    if pts[0][1] is None:
        raise ValueError("F-matrix is singular")
    if isinstance(pts[0][1], AtLeast):
        return None
    hull = hull_from_valuations(pts, r)
    return hull.scale_y(Fraction(1, m))


def newton_polygon(M, prec=None, strict=True):
    """Newton polygon of F (slopes of F, not of F^m).

    Retries once at twice the precision; ``strict`` raises when still
    uncertified, otherwise the uncertified polygon is returned.
    """
    U, c = _normalised(M)
    N = prec if prec is not None else M.working_precision()
    given = mat_precision(M.U)
    result = None
    for attempt in range(2):
        Nw = min(N, given + c) if given != INF else N
        result = _newton_at(M, U, Nw)
        if result is not None and result.certified:
            break
        if given != INF and Nw >= given + c:
            break
        N *= 2
    if result is None or not result.certified:
        if strict:
            raise InsufficientPrecision("Newton polygon not certified", N)
        if result is None:
            return None
    if c:
        result = ConvexPolygon([(x, y - c * x) for x, y in result.breaks], result.certified)
    return result


def classify(M, prec=None):
    return SlopeMultiset.from_polygon(newton_polygon(M, prec))


def is_isoclinic(M, prec=None):
    return is_straight_line(newton_polygon(M, prec))


def hodge_newton_ok(M):
    """Hodge polygon lies below the Newton polygon with equal endpoints."""
    H = hodge_polygon(M)
    P = newton_polygon(M)
    return lies_above(P, H) and H.breaks[-1] == P.breaks[-1]


# ---------------------------------------------------------------------------
# independent oracle: valuation growth of exterior powers


def _min_val(A):
    best = INF
    exact = True
    for r in A:
        for a in r:
            if a.coeffs:
                if a.val < best:
                    best = a.val
    floor = min((a.prec for r in A for a in r if not a.coeffs and a.prec != INF), default=INF)
    if floor < best:
        exact = False
        best = floor
    return best, exact


def default_depth(r):
    L = 1
    for k in range(2, r + 1):
        L = L * k // math.gcd(L, k)
    return 2 * L


def newton_oracle(M, depth=None):
    """Estimate the Newton polygon from min-entry valuations of the powers of
    the exterior powers of F.

    The sum of the j smallest slopes is estimated by (v(2n) - v(n)) / n at
    n = depth and n = 2 depth; the polygon is certified when both estimates
    agree for every j.
    """
    U, c = _normalised(M)
    r = M.rank
    n0 = depth if depth is not None else default_depth(r)
    dval = dvr.valuation_of_det(U, M.prec)
    sums = [Fraction(0)]
    certified = True
    for j in range(1, r + 1):
        n_max = 4 * n0
        T = (n_max * j * dval) // r + j * dval + 2
        G = exterior_power(SigmaMatrix(mat_truncate(U, T), 1, M.q), j)
        G = G.truncate(T)
        vals = {}
        P = power(G, n0).truncate(T)
        vals[n0] = _min_val(P.A)
        P2 = compose(P, P).truncate(T)
        vals[2 * n0] = _min_val(P2.A)
        P4 = compose(P2, P2).truncate(T)
        vals[4 * n0] = _min_val(P4.A)
        ok = all(v[1] for v in vals.values())
        est1 = Fraction(vals[2 * n0][0] - vals[n0][0], n0)
        est2 = Fraction(vals[4 * n0][0] - vals[2 * n0][0], 2 * n0)
        if ok and est1 == est2:
            sums.append(est1)
        else:
            certified = False
            sums.append(Fraction(vals[4 * n0][0], 4 * n0))
    pts = [(j, s) for j, s in enumerate(sums)]
    hull = _lower_hull_points(pts)
    poly = ConvexPolygon(hull, certified)
    if certified and any(poly(j) != s for j, s in pts):
        # the estimates are not the vertices of a convex polygon
        poly = poly.with_certified(False)
    if c:
        poly = ConvexPolygon([(x, y - c * x) for x, y in poly.breaks], poly.certified)
    return poly


def _lower_hull_points(pts):
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (y1 - y0) * (p[0] - x0) >= (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


# ---------------------------------------------------------------------------
# isoclinic normalisation


def isoclinic_normalize(M, prec=None):
    """Return (M', B) with M' isogenous to M and im F'^r = z^d * lattice.

    B is the basis of the new lattice in the old coordinates, so that
    U' = B^-1 U sigma(B).
    """
    P = newton_polygon(M, prec)
    if not is_straight_line(P):
        raise ValueError("module is not isoclinic")
    r = M.rank
    N = prec if prec is not None else M.working_precision()
    U = mat_truncate(M.U, N)
    slope = P.height / P.width
    # z^-s F^n has slope 0 for n a multiple of the denominator of the slope
    n = slope.denominator
    s = slope.numerator
    Fn = power(SigmaMatrix(U, 1, M.q), n)
    F = M.field
    one = TruncSeries.one(F)
    zero = TruncSeries.zero(F)
    B = tuple(tuple(one if i == j else zero for j in range(r)) for i in range(r))
    vdet = 0
    cap = r * max(1, M._dim_estimate()) + N
    for _ in range(cap):
        img = mat_shift(mat_mul(Fn.A, mat_sigma(B, M.q, n)), -s)
        G = tuple(tuple(B[i]) + tuple(img[i]) for i in range(r))
        Bn = dvr.column_hermite(G)
        vn = sum(Bn[i][i].val for i in range(r))
        if vn == vdet:
            break
        B, vdet = Bn, vn
    else:
        raise InsufficientPrecision("lattice iteration did not stabilise", N)
    Binv = dvr.lower_triangular_inverse(B)
    Unew = mat_mul(mat_mul(Binv, U), mat_sigma(B, M.q, 1))
    if isinstance(M, DieudonneModule):
        out = DieudonneModule(F, M.q, Unew, M.dim, M.zeta, M.prec)
    else:
        out = Isocrystal(F, M.q, Unew, M.prec)
    return out, B


def is_normalized(M, prec=None):
    """im F^r = z^d * lattice, checked as: z^-d F^r is a lattice automorphism."""
    r = M.rank
    N = prec if prec is not None else M.working_precision()
    U = mat_truncate(M.U, N)
    d = dvr.valuation_of_det(U)
    Fr = power(SigmaMatrix(U, 1, M.q), r).A
    if d % 1:
        return False
    A = mat_shift(Fr, -d)
    if not dvr.is_integral(A):
        return False
    return all(e == 0 for e in dvr.smith_exponents(A))


# ---------------------------------------------------------------------------
# isogeny solving


class QuasiIsogenySpace:
    """F_p-span of solutions Phi = z^-h Psi of Phi U = U' sigma(Phi) modulo
    z^(N-h), stored through the coefficients Psi_0..Psi_{N-1} of Psi."""

    def __init__(self, field, q, rank, h, N, basis):
        self.field = field
        self.q = q
        self.rank = rank
        self.h = h
        self.N = N
        self.basis = basis  # numpy array, rows = solutions in F_p coordinates

    @property
    def dimension(self):
        return self.basis.shape[0]

    def _block(self):
        return self.rank * self.rank * self.field.e

    def _vec_to_series_matrix(self, v):
        F = self.field
        r, e = self.rank, F.e
        blk = self._block()
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                cs = []
                for mu in range(self.N):
                    off = mu * blk + (i * r + j) * e
                    cs.append(F.from_digits([int(t) for t in v[off:off + e]]))
                row.append(TruncSeries._raw(F, -self.h, cs, self.N - self.h))
            out.append(tuple(row))
        return tuple(out)

    def basis_matrices(self):
        return [self._vec_to_series_matrix(v) for v in self.basis]

    def _matrix_to_vec(self, Phi):
        F = self.field
        r = self.rank
        out = np.zeros(self.N * self._block(), dtype=np.int64)
        for i in range(r):
            for j in range(r):
                a = Phi[i][j]
                if a.coeffs and a.val < -self.h:
                    return None
                for mu in range(self.N):
                    k = mu - self.h
                    if k >= a.prec:
                        raise InsufficientPrecision("candidate known to lower precision than the space", a.prec)
                    c = a.coeff(k)
                    if c:
                        off = mu * self._block() + (i * r + j) * F.e
                        out[off:off + F.e] = F.digits(c)
        return out

    def contains(self, Phi):
        v = self._matrix_to_vec(Phi)
        if v is None:
            return False
        return fplinalg.in_span(v, self.basis, self.field.p)

    def combination(self, coeffs):
        v = (np.asarray(coeffs, dtype=np.int64) @ self.basis) % self.field.p
        return self._vec_to_series_matrix(v)

    def invertibility_flags(self):
        """For each basis solution: det Psi is certified nonzero mod z^N."""
        flags = []
        for v in self.basis:
            Phi = self._vec_to_series_matrix(v)
            flags.append(certified_invertible(Phi))
        return flags

    def random_element(self, rng=random):
        if self.dimension == 0:
            return self._vec_to_series_matrix(np.zeros(self.N * self._block(), dtype=np.int64))
        coeffs = [rng.randrange(self.field.p) for _ in range(self.dimension)]
        return self.combination(coeffs)


def certified_invertible(Phi):
    """det(Phi) has a certified valuation (nonzero modulo the precision)."""
    from .smat import det
    d = det(Phi)
    return bool(d.coeffs)


def _coeff_matrices(U, N):
    """U_0..U_{N-1} as integer matrices."""
    r = len(U)
    out = []
    for nu in range(N):
        out.append([[U[i][j].coeff(nu) for j in range(r)] for i in range(r)])
    return out


def isogeny_solve(M, Mp, h=0, prec=None):
    """All Phi = z^-h Psi, Psi over K[[z]] mod z^N, with Phi U = U' sigma(Phi).

    Psi solves the same equation.  Its coefficients are found in turn: step
    mu solves Psi_mu U_0 - U'_0 sigma(Psi_mu) = -sum_{nu>=1} (Psi_{mu-nu} U_nu
    - U'_nu sigma(Psi_{mu-nu})), with the earlier coefficients carried as
    free parameters of the space found so far.
    """
    if M.field is not Mp.field or M.rank != Mp.rank or M.q != Mp.q:
        raise ValueError("modules must share field, ground field and rank")
    F = M.field
    r = M.rank
    p = F.p
    N = prec if prec is not None else min(M.working_precision(), Mp.working_precision())
    if mat_valuation(M.U) < 0 or mat_valuation(Mp.U) < 0:
        raise ValueError("F-matrices must be integral")
    Uc = _coeff_matrices(M.U, N)
    Upc = _coeff_matrices(Mp.U, N)
    ident = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    zero = [[0] * r for _ in range(r)]
    E = []
    for nu in range(N):
        if not any(any(row) for row in Uc[nu]) and not any(any(row) for row in Upc[nu]):
            E.append(None)
            continue
        sys_ = SemilinearSystem(F, M.q, ident, Upc[nu], zero, x_shape=(r, r), Cr=Uc[nu], Dr=ident)
        E.append(linearize_semilinear(sys_)[0])
    blk = r * r * F.e
    # S: rows are solutions for Psi_0..Psi_{mu-1}
    S = np.zeros((1, 0), dtype=np.int64)
    for mu in range(N):
        k = S.shape[0]
        cols = np.zeros((blk, k), dtype=np.int64)
        for nu in range(1, mu + 1):
            if E[nu] is None:
                continue
            prev = S[:, (mu - nu) * blk:(mu - nu + 1) * blk]
            cols = (cols + E[nu] @ prev.T) % p
        E0 = E[0] if E[0] is not None else np.zeros((blk, blk), dtype=np.int64)
        A = np.concatenate([E0, cols], axis=1) % p
        ker = fplinalg.nullspace(A, p)
        x = ker[:, :blk]
        t = ker[:, blk:]
        S = np.concatenate([(t @ S) % p, x], axis=1) if S.shape[1] else x
        S = _row_basis(S, p)
    S = S.reshape(-1, N * blk)
    return QuasiIsogenySpace(F, M.q, r, h, N, S)


def _row_basis(S, p):
    if S.shape[0] == 0:
        return S
    R, piv = fplinalg.rref(S, p)
    return R[:len(piv)]


def check_isogeny_relation(Phi, M, Mp):
    """Phi U - U' sigma(Phi) vanishes modulo the precision of Phi."""
    N = mat_precision(Phi)
    lhs = mat_mul(Phi, M.U)
    rhs = mat_mul(Mp.U, mat_sigma(Phi, M.q, 1))
    return all((a - b).truncate(N).is_zero() for ra, rb in zip(lhs, rhs) for a, b in zip(ra, rb))


def find_invertible(space, rng=None, tries=64):
    """A random element of the space with certified nonzero determinant, or
    None."""
    rng = rng or random.Random(0)
    for _ in range(tries):
        Phi = space.random_element(rng)
        if certified_invertible(Phi):
            return Phi
    return None

"""Abelian sheaves on P^1 over F_q with free-at-infinity presentations.

A sheaf is stored at a field point K.  F_i = sum_j O(n_ij) for
i = 0..l-1, and the global sections of O(n) over C' = P^1 - {oo} are
identified with polynomials in t of degree <= n.  The maps Pi_i and tau_i
are then polynomial matrices; entry (a, b) of a map F_i -> F_i' has degree
at most n_{i',a} - n_{i,b}.  F_{i+l} = F_i(k oo) has splitting type
n_i + k and the same polynomial matrices.

Near oo we use z = 1/t.  The sections t^n e_j generate O(n) there, so a
polynomial matrix P : F_i -> F_i' has local matrix
diag(z^{n_i'}) P(1/z) diag(z^{-n_i}).
"""
from __future__ import annotations

import math
from functools import reduce

import numpy as np

from . import dvr, fplinalg, klinalg
from .errors import InsufficientPrecision, MalformedInput, ValidationFailure
from .gf import common_extension, embed, make_field
from .isocrystal import DieudonneModule
from .series import CharValue, Poly, TruncSeries, coefficient_ring, substitute_t_inverse
from .smat import (SemilinearSystem, block_matrix, det, linearize_semilinear, mat_mul,
                   mat_sigma, power)

# ---------------------------------------------------------------------------
# polynomial matrices


def pmat(field, rows):
    """Polynomial matrix from rows of Poly values, coefficient lists or
    constant encodings."""
    out = []
    for row in rows:
        r = []
        for x in row:
            if isinstance(x, Poly):
                r.append(x)
            elif isinstance(x, (list, tuple)):
                r.append(Poly(field, x))
            else:
                r.append(Poly(field, [x]))
        out.append(tuple(r))
    return tuple(out)


def pm_identity(field, n):
    one, zero = Poly.one(field), Poly.zero(field)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def pm_equal(A, B):
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def pm_product(mats, field, n):
    """mats[0] * mats[1] * ... (identity for an empty list)."""
    return reduce(mat_mul, mats, pm_identity(field, n))


def pm_map(A, emb):
    return tuple(tuple(a.map_field(emb) for a in r) for r in A)


def pm_degree(A):
    return max((a.degree() for r in A for a in r if not a.is_zero()), default=-1)


def pm_det(A):
    return det(A)


def pm_inverse(P):
    """Inverse of a polynomial matrix with nonzero constant determinant, by
    Euclidean row reduction of [P | I]."""
    n = len(P)
    F = P[0][0].field
    one, zero = Poly.one(F), Poly.zero(F)
    M = [list(P[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        while True:
            rows = [i for i in range(c, n) if not M[i][c].is_zero()]
            if not rows:
                raise ValueError("matrix is singular")
            piv = min(rows, key=lambda i: M[i][c].degree())
            M[c], M[piv] = M[piv], M[c]
            done = True
            for i in range(c + 1, n):
                if not M[i][c].is_zero():
                    qt = M[i][c] // M[c][c]
                    M[i] = [x - qt * y for x, y in zip(M[i], M[c])]
                    if not M[i][c].is_zero():
                        done = False
            if done:
                break
        if M[c][c].degree() != 0:
            raise ValueError("matrix is not invertible over K[t]")
    for c in range(n - 1, -1, -1):
        inv = F.inv(M[c][c][0])
        M[c] = [x.scale(inv) for x in M[c]]
        for i in range(c):
            if not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return tuple(tuple(row[n:]) for row in M)


def is_unimodular(P):
    d = pm_det(P)
    return d.degree() == 0


def local_matrix(P, n_src, n_tgt):
    """Matrix over K((z)) of P : sum O(n_src) -> sum O(n_tgt) in the local
    bases at oo."""
    return tuple(
        tuple(substitute_t_inverse(P[a][b]).shift(n_tgt[a] - n_src[b]) for b in range(len(n_src)))
        for a in range(len(n_tgt)))


def global_matrix(P):
    """P(1/z) without twisting."""
    return tuple(tuple(substitute_t_inverse(x) for x in r) for r in P)


# ---------------------------------------------------------------------------


def slope_pair(r, d):
    g = math.gcd(r, d)
    return d // g, r // g


class AbelianSheafP1:
    """An abelian sheaf on P^1 at a field point.

    ``splitting`` holds n_0..n_{l-1}; ``Pi`` and ``tau`` hold the polynomial
    matrices Pi_i : F_i -> F_{i+1} and tau_i : sigma^* F_i -> F_{i+1}.
    """

    def __init__(self, field, q, r, d, splitting, Pi, tau, zeta=None):
        k, l = slope_pair(r, d)
        if len(splitting) != l or len(Pi) != l or len(tau) != l:
            raise MalformedInput(f"expected {l} bundles, maps Pi and maps tau")
        self.field = field
        self.q = q
        field.ground_degree(q)
        self.r, self.d, self.k, self.l = r, d, k, l
        self.splitting = tuple(tuple(int(x) for x in n) for n in splitting)
        if any(len(n) != r for n in self.splitting):
            raise MalformedInput("each splitting type needs r entries")
        self.Pi = tuple(pmat(field, P) for P in Pi)
        self.tau = tuple(pmat(field, T) for T in tau)
        for M in self.Pi + self.tau:
            if len(M) != r or any(len(row) != r for row in M):
                raise MalformedInput("maps must be r x r")
            if any(x.ring != coefficient_ring(field) for row in M for x in row):
                raise MalformedInput("matrix entries must have coefficients in the base field")
        self.zeta = zeta if zeta is not None else CharValue.zero(field)
        if self.zeta.M != 1:
            raise MalformedInput("sheaves are handled at field points (zeta in K)")

    def n(self, i):
        """Splitting type of F_i for any integer i."""
        j, s = i % self.l, i // self.l
        return tuple(x + s * self.k for x in self.splitting[j])

    def Pi_at(self, i):
        return self.Pi[i % self.l]

    def tau_at(self, i):
        return self.tau[i % self.l]

    def base_change(self, target):
        if target is self.field:
            return self
        emb = embed(self.field, target)
        return AbelianSheafP1(target, self.q, self.r, self.d, self.splitting,
                              [pm_map(P, emb) for P in self.Pi],
                              [pm_map(T, emb) for T in self.tau], self.zeta.map_field(emb))

    def C_prime_matrix(self):
        """U = Pi_0^-1 tau_0: the sigma-linear endomorphism of F_0 over C'."""
        return mat_mul(pm_inverse(self.Pi[0]), self.tau[0])

    def __eq__(self, other):
        return (isinstance(other, AbelianSheafP1) and self.field is other.field
                and self.q == other.q and self.r == other.r and self.d == other.d
                and self.splitting == other.splitting and self.zeta == other.zeta
                and all(pm_equal(a, b) for a, b in zip(self.Pi, other.Pi))
                and all(pm_equal(a, b) for a, b in zip(self.tau, other.tau)))

    def __hash__(self):
        return hash((self.r, self.d, self.splitting))

    def __repr__(self):
        return (f"AbelianSheafP1(r={self.r}, d={self.d}, k={self.k}, l={self.l}, "
                f"field={self.field!r}, splitting={list(self.splitting)})")

    def to_json(self):
        from .codec import sheaf_to_json
        return sheaf_to_json(self)


class PolarizedMotive:
    """(F, tau) with F = sum O(n_j) and tau : sigma^* F -> F(k oo)."""

    def __init__(self, field, q, r, d, splitting, tau, zeta=None):
        self.field = field
        self.q = q
        self.r, self.d = r, d
        self.k, self.l = slope_pair(r, d)
        self.splitting = tuple(int(x) for x in splitting)
        self.tau = pmat(field, tau)
        self.zeta = zeta if zeta is not None else CharValue.zero(field)

    def pole_bound_ok(self):
        n = self.splitting
        return all(self.tau[a][b].degree() <= n[a] + self.k - n[b]
                   for a in range(self.r) for b in range(self.r))

    def __repr__(self):
        return f"PolarizedMotive(r={self.r}, d={self.d}, splitting={list(self.splitting)})"


# ---------------------------------------------------------------------------
# validation


def _bound_violations(P, n_src, n_tgt):
    bad = []
    for a in range(len(n_tgt)):
        for b in range(len(n_src)):
            x = P[a][b]
            if not x.is_zero() and x.degree() > n_tgt[a] - n_src[b]:
                bad.append([a, b, x.degree(), n_tgt[a] - n_src[b]])
    return bad


def _local_exponents_at(P, t0):
    """Elementary divisor exponents of P at the point t = t0 of C'."""
    shifted = tuple(tuple(TruncSeries.from_poly(x.taylor_shift(t0)) for x in r) for r in P)
    return dvr.smith_exponents(shifted)


def _poly_json(x):
    return list(x.coeffs)


def validate_sheaf(S):
    """Check the ladder conditions at a field point.

    Returns a report with one boolean per condition (degree_bounds,
    commutative, periodic, coker_Pi, coker_tau) and witnesses for failures.
    Condition 4 is checked on C' at t = 1/zeta when zeta != 0; when
    zeta = 0 the characteristic sits at oo and it is checked on the local
    matrices there.
    """
    F, r, d, l, k = S.field, S.r, S.d, S.l, S.k
    witnesses = {}
    conds = {}

    bad = []
    for i in range(l):
        for name, M in (("Pi", S.Pi[i]), ("tau", S.tau[i])):
            for v in _bound_violations(M, S.n(i), S.n(i + 1)):
                bad.append({"map": name, "index": i, "entry": v[:2], "degree": v[2], "bound": v[3]})
    conds["degree_bounds"] = not bad
    if bad:
        witnesses["degree_bounds"] = bad

    bad = []
    for i in range(l):
        lhs = mat_mul(S.Pi_at(i + 1), S.tau[i])
        rhs = mat_mul(S.tau_at(i + 1), mat_sigma(S.Pi[i], S.q))
        for a in range(r):
            for b in range(r):
                if lhs[a][b] != rhs[a][b]:
                    bad.append({"index": i, "entry": [a, b],
                                "lhs": _poly_json(lhs[a][b]), "rhs": _poly_json(rhs[a][b])})
    conds["commutative"] = not bad
    if bad:
        witnesses["commutative"] = bad[:8]

    comp = pm_product(list(reversed(S.Pi)), F, r)
    conds["periodic"] = pm_equal(comp, pm_identity(F, r))
    if not conds["periodic"]:
        witnesses["periodic"] = [[_poly_json(x) for x in row] for row in comp]

    zeta0 = S.zeta.value
    bad = []
    for i in range(l):
        D = pm_det(S.Pi[i])
        if D.is_zero():
            bad.append({"index": i, "reason": "not injective"})
            continue
        exps = dvr.smith_exponents(local_matrix(S.Pi[i], S.n(i), S.n(i + 1)))
        if D.degree() != 0 or any(e < 0 for e in exps) or sum(exps) != d:
            bad.append({"index": i, "det_degree": D.degree(), "exponents_at_infinity": exps})
    conds["coker_Pi"] = not bad
    if bad:
        witnesses["coker_Pi"] = bad

    bad = []
    for i in range(l):
        T = S.tau[i]
        D = pm_det(T)
        if D.is_zero():
            bad.append({"index": i, "reason": "not injective"})
            continue
        exps = dvr.smith_exponents(local_matrix(T, S.n(i), S.n(i + 1)))
        if zeta0 == 0:
            ok = (D.degree() == 0 and all(0 <= e <= d for e in exps) and sum(exps) == d)
            if not ok:
                bad.append({"index": i, "det_degree": D.degree(), "exponents_at_infinity": exps})
        else:
            t0 = F.inv(zeta0)
            fin = _local_exponents_at(T, t0)
            ok = (all(e == 0 for e in exps) and D.degree() == d
                  and sum(fin) == D.degree() and all(e <= d for e in fin))
            if not ok:
                bad.append({"index": i, "det_degree": D.degree(), "exponents_at_infinity": exps,
                            "exponents_at_characteristic": fin})
    conds["coker_tau"] = not bad
    if bad:
        witnesses["coker_tau"] = bad

    return {"conditions": conds, "witnesses": witnesses, "valid": all(conds.values()),
            "r": r, "d": d, "k": k, "l": l}


def require_valid(S):
    rep = validate_sheaf(S)
    if not rep["valid"]:
        raise ValidationFailure("not an abelian sheaf", rep)
    return rep


# ---------------------------------------------------------------------------
# the equivalence with polarized motives


def motive_of_sheaf(S):
    """tau = Pi_{l-1} ... Pi_1 tau_0 on F = F_0."""
    tau = pm_product([S.Pi[i] for i in range(S.l - 1, 0, -1)] + [S.tau[0]], S.field, S.r)
    return PolarizedMotive(S.field, S.q, S.r, S.d, S.splitting[0], tau, S.zeta)


def split_bundle(B, field):
    """Split the bundle that is K[t]^r over C' and has the lattice spanned
    by the columns of B (global coordinates, over K((z))) at oo.

    Returns (P, n): P is a polynomial matrix with constant nonzero
    determinant whose columns v_j give E = sum O(n_j), i.e. the columns of
    P(1/z) diag(z^-n_j) span the same lattice as B.  The search runs over
    H^0(E(s oo)) for increasing s and picks new generators greedily.
    """
    r = len(B)
    vals = [x.val for row in B for x in row if x.coeffs]
    a = -min(vals)
    C = dvr.mat_inverse(B)
    cvals = [x.val for row in C for x in row if x.coeffs]
    mu_min = min(cvals)
    beta = -mu_min
    chosen = []  # (coefficient vectors per component, level s)
    s = -a
    while len(chosen) < r:
        if s > beta:
            raise ValidationFailure("lattice splitting search did not terminate", {"a": a, "beta": beta})
        D = s + a
        ncols = r * (D + 1)
        rows = []
        for x in range(s + mu_min - D, 0):
            for ap in range(r):
                row = [0] * ncols
                for i in range(D + 1):
                    mu = x - s + i
                    if mu < mu_min:
                        continue
                    for b in range(r):
                        c = C[ap][b]
                        if mu >= c.prec:
                            raise InsufficientPrecision("lattice basis known to too low a precision", c.prec)
                        row[i * r + b] = c.coeff(mu)
                if any(row):
                    rows.append(row)
        V = klinalg.nullspace(rows, field, ncols) if rows else klinalg.nullspace([], field, ncols)
        current = []
        for w, s0 in chosen:
            for j in range(s - s0 + 1):
                vec = [0] * ncols
                for b in range(r):
                    for i, cf in enumerate(w[b]):
                        if i + j <= D:
                            vec[(i + j) * r + b] = cf
                current.append(vec)
        for v in V:
            if not klinalg.in_span(v, current, field):
                current.append(v)
                chosen.append(([[v[i * r + b] for i in range(D + 1)] for b in range(r)], s))
        s += 1
    if len(chosen) != r:
        raise ValidationFailure("lattice splitting produced too many generators", {"count": len(chosen)})
    P = tuple(tuple(Poly(field, chosen[j][0][b]) for j in range(r)) for b in range(r))
    n = [-s0 for _, s0 in chosen]
    if not is_unimodular(P):
        raise ValidationFailure("splitting basis is not unimodular over C'", {})
    check = tuple(tuple(substitute_t_inverse(P[i][j]).shift(-n[j]) for j in range(r)) for i in range(r))
    if not dvr.same_lattice(check, B):
        raise ValidationFailure("splitting basis does not reproduce the lattice at oo", {})
    return P, n


def _twist_basis(field, n):
    """Global coordinates of the local basis t^n_j e_j of sum O(n_j)."""
    r = len(n)
    zero = TruncSeries.zero(field)
    return tuple(tuple(TruncSeries.monomial(field, 1, -n[i]) if i == j else zero for j in range(r))
                 for i in range(r))


def _lattice_of_generators(G):
    """Lower triangular basis of the K[[z]]-span of the columns of G."""
    vals = [x.val for row in G for x in row if x.coeffs]
    c = -min(vals)
    Gs = tuple(tuple(x.shift(c) for x in row) for row in G)
    H = dvr.column_hermite(Gs)
    return tuple(tuple(x.shift(-c) for x in row) for row in H)


def _build_from_bases(S, P, n, field):
    """Sheaf with the same data on C' whose F_i has basis P[i] (columns,
    in F_i coordinates of S) and splitting n[i]."""
    l = S.l
    Pinv = [pm_inverse(P[i]) for i in range(l)]
    Pi, tau = [], []
    for i in range(l):
        j = (i + 1) % l
        Pi.append(mat_mul(Pinv[j], mat_mul(S.Pi[i], P[i])))
        tau.append(mat_mul(Pinv[j], mat_mul(S.tau[i], mat_sigma(P[i], S.q))))
    return AbelianSheafP1(field, S.q, S.r, S.d, n, Pi, tau, S.zeta)


def sheaf_of_motive(M):
    """F_i = F + tau F + ... + tau^i F, saturated at oo by lattice arithmetic.

    Needs the characteristic away from oo (zeta != 0).  Returns the sheaf.
    """
    if M.zeta.value == 0:
        raise ValueError("characteristic at infinity: the saturation does not recover the ladder")
    F, r, l, k, q = M.field, M.r, M.l, M.k, M.q
    n0 = list(M.splitting)
    B0 = _twist_basis(F, n0)
    P = [pm_identity(F, r)]
    ns = [n0]
    gens = [B0]
    lattice = B0
    Ti = pm_identity(F, r)
    for i in range(1, l + 1):
        Ti = mat_mul(M.tau, mat_sigma(Ti, q))
        gens.append(mat_mul(global_matrix(Ti), B0))
        G = tuple(tuple(x for g in gens for x in g[row]) for row in range(r))
        lattice = _lattice_of_generators(G)
        if i < l:
            Pi_, ni = split_bundle(lattice, F)
            P.append(Pi_)
            ns.append(ni)
    expected = _twist_basis(F, [x + k for x in n0])
    if not dvr.same_lattice(lattice, expected):
        raise ValidationFailure("the l-th saturation is not F(k oo)", {})
    # every F_i equals F over C'; in the coordinates of F the ladder has
    # Pi_i = Id and tau_i = tau, which we rewrite in the split bases P_i
    Pinv = [pm_inverse(x) for x in P]
    Pi, tau = [], []
    for i in range(l):
        j = (i + 1) % l
        Pi.append(mat_mul(Pinv[j], P[i]))
        tau.append(mat_mul(Pinv[j], mat_mul(M.tau, mat_sigma(P[i], q))))
    return AbelianSheafP1(F, q, r, M.d, ns, Pi, tau, M.zeta)


def ladder_isomorphism(S, Sp):
    """Matrices Phi_i : F'_i -> F_i over C' transporting Sp to S, assuming
    both have F_i identified with F_0 on C' through their Pi maps and
    the same motive.  Returns (Phis, ok) where ok says that every Phi_i is
    unimodular, regular and invertible at oo, and intertwines Pi and tau."""
    phis = transport_matrices(S, Sp, pm_identity(S.field, S.r))
    return phis, is_ladder_isomorphism(S, Sp, phis)


def is_ladder_isomorphism(S, Sp, phis):
    """phis[i] : F'_i -> F_i commute with Pi and tau and are isomorphisms of
    bundles (constant determinant, unimodular local matrices at oo)."""
    l = S.l
    for i in range(l):
        j = (i + 1) % l
        if not pm_equal(mat_mul(phis[j], Sp.Pi[i]), mat_mul(S.Pi[i], phis[i])):
            return False
        if not pm_equal(mat_mul(phis[j], Sp.tau[i]), mat_mul(S.tau[i], mat_sigma(phis[i], S.q))):
            return False
        if not is_unimodular(phis[i]):
            return False
        loc = local_matrix(phis[i], Sp.n(i), S.n(i))
        exps = dvr.smith_exponents(loc)
        if not dvr.is_integral(loc) or any(e != 0 for e in exps):
            return False
    return True


# ---------------------------------------------------------------------------
# completion at infinity


def completion_field(S):
    g = S.field.ground_degree(S.q)
    return common_extension(S.field, make_field(S.field.p, g * S.l))


def completion_at_infinity(S, prec=None):
    """The formal module at oo: F-hat = sum F-hat_i with F acting by the
    block matrix whose block (i+1, i) is the local matrix of tau_i (for
    i = l-1 read in F_0 via z^k).  The base is extended to contain
    F_{q^l}; lambda in F_{q^l} acts on block i as lambda^{q^i}.

    The returned DieudonneModule carries the block matrix of Pi as
    attribute ``Pi`` and l as ``ell``.
    """
    K = completion_field(S)
    S2 = S.base_change(K)
    r, l = S.r, S.l
    zero_blk = tuple(tuple(TruncSeries.zero(K) for _ in range(r)) for _ in range(r))
    Fb = [[zero_blk] * l for _ in range(l)]
    Pb = [[zero_blk] * l for _ in range(l)]
    for i in range(l):
        j = (i + 1) % l
        Fb[j][i] = local_matrix(S2.tau[i], S2.n(i), S2.n(i + 1))
        Pb[j][i] = local_matrix(S2.Pi[i], S2.n(i), S2.n(i + 1))
    U = block_matrix(Fb)
    M = DieudonneModule(K, S.q, U, S.d * l, S2.zeta, prec)
    M.Pi = block_matrix(Pb)
    M.ell = l
    return M


def lambda_action(S, lam):
    """Diagonal matrix of lambda in F_{q^l} on the completion."""
    K = completion_field(S)
    g = K.ground_degree(S.q)
    diag = []
    for i in range(S.l):
        diag.extend([K.frob(lam, g * i)] * S.r)
    n = len(diag)
    zero = TruncSeries.zero(K)
    return tuple(tuple(TruncSeries.monomial(K, diag[a], 0) if a == b else zero for b in range(n))
                 for a in range(n))


def in_isoclinic_locus(S, prec=None):
    from .isocrystal import is_isoclinic
    if S.zeta.value != 0:
        raise ValueError("the isoclinic locus is tested on the fibre over oo (zeta = 0)")
    return is_isoclinic(completion_at_infinity(S, prec))


def shift(S, n):
    """The reindexed ladder (F_{i+n}, Pi_{i+n}, tau_{i+n})."""
    l = S.l
    return AbelianSheafP1(S.field, S.q, S.r, S.d, [S.n(i + n) for i in range(l)],
                          [S.Pi_at(i + n) for i in range(l)],
                          [S.tau_at(i + n) for i in range(l)], S.zeta)


def lemma71_check(S, n):
    """Image lattice of F^n equals that of Pi^n on the completion."""
    from .isocrystal import is_isoclinic
    M = completion_at_infinity(S)
    if not is_isoclinic(M):
        raise ValueError("the formal module is not isoclinic")
    A = power(M.F, n).A
    Pn = reduce(mat_mul, [M.Pi] * n)
    return dvr.same_lattice(A, Pn)


# ---------------------------------------------------------------------------
# tau-invariants on a finite subscheme I = V(a) of C'


class TauInvariants:
    """F_p-space of v in (L[t]/a)^r with U sigma(v) = v."""

    def __init__(self, field, ground, q, r, a, basis):
        self.field = field
        self.ground = ground
        self.q = q
        self.r = r
        self.a = a
        self.delta = a.degree()
        self.basis = basis

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def cardinality(self):
        return self.field.p ** self.dimension

    def vector(self, flat):
        """Element as r coefficient lists of length deg a."""
        return [[flat[b * self.delta + c] for c in range(self.delta)] for b in range(self.r)]

    def elements(self):
        L = self.field
        p = L.p
        dim = self.dimension
        B = [self._digits(v) for v in self.basis]
        for idx in range(p ** dim):
            acc = np.zeros(len(B[0]) if B else self.r * self.delta * L.e, dtype=np.int64)
            c = idx
            for j in range(dim):
                acc = acc + (c % p) * B[j]
                c //= p
            yield self._from_digits(acc % p)

    def _digits(self, flat):
        return np.array([d for x in flat for d in self.field.digits(x)], dtype=np.int64)

    def _from_digits(self, arr):
        e = self.field.e
        return [self.field.from_digits([int(t) for t in arr[i * e:(i + 1) * e]])
                for i in range(len(arr) // e)]

    def contains(self, flat):
        p = self.field.p
        if not self.basis:
            return not any(flat)
        return fplinalg.in_span(self._digits(flat), np.array([self._digits(v) for v in self.basis]), p)


def _mod_matrix(U, a, field):
    """L-matrix of v -> U v on (L[t]/a)^r in the basis t^c e_b."""
    r = len(U)
    delta = a.degree()
    n = r * delta
    M = [[0] * n for _ in range(n)]
    for b in range(r):
        for c in range(delta):
            col = b * delta + c
            for row in range(r):
                img = (U[row][b].shift(c)) % a
                for cc in range(delta):
                    M[row * delta + cc][col] = img[cc]
    return M


def tau_invariants(S, a, L=None):
    """tau-invariants of S restricted to I = V(a) over the extension L."""
    F = S.field
    a = a if isinstance(a, Poly) else Poly(F, a)
    if a.degree() < 1:
        raise ValueError("I must be a proper nonzero ideal")
    U = S.C_prime_matrix()
    D = pm_det(U)
    if D.gcd(a).degree() > 0:
        raise ValueError("the characteristic meets I")
    L = L or F
    emb = embed(F, L)
    UL = pm_map(U, emb)
    aL = a.map_field(emb)
    M = _mod_matrix(UL, aL, L)
    n = len(M)
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    zero = [[0] for _ in range(n)]
    sys_ = SemilinearSystem(L, S.q, ident, M, zero, x_shape=(n, 1))
    A, _ = linearize_semilinear(sys_)
    ker = fplinalg.nullspace(A, L.p)
    basis = []
    e = L.e
    for v in ker:
        basis.append([L.from_digits([int(t) for t in v[i * e:(i + 1) * e]]) for i in range(n)])
    inv = TauInvariants(L, F, S.q, S.r, aL, basis)
    inv.U = UL
    return inv


def invariant_frame(inv, rng=None):
    """r invariant vectors forming an O_I-basis (det a unit mod a), found by
    enumeration; None if the invariants are not free of rank r."""
    import itertools
    L = inv.field
    elems = list(inv.elements())
    r = inv.r
    a = inv.a
    for combo in itertools.product(elems, repeat=r):
        M = tuple(tuple(Poly(L, combo[j][b * inv.delta:(b + 1) * inv.delta]) for j in range(r))
                  for b in range(r))
        D = pm_det(M) % a
        if not D.is_zero() and D.gcd(a).degree() == 0:
            return M
        if len(elems) ** r > 200000:
            break
    return None


def frame_is_invariant(inv, M):
    """Columns of M (polynomials mod a) are invariants and det M is a unit."""
    r, a = inv.r, inv.a
    q = inv.q
    lhs = mat_mul(inv.U, mat_sigma(M, q))
    for i in range(r):
        for j in range(r):
            if (lhs[i][j] - M[i][j]) % a != Poly.zero(inv.field):
                return False
    D = pm_det(M) % a
    return not D.is_zero() and D.gcd(a).degree() == 0


# ---------------------------------------------------------------------------
# isogenies between sheaves over C'


class SheafIsogenySpace:
    """F_p-span of polynomial Phi = sum Phi_mu t^mu (deg <= D) with
    Phi U' = U sigma(Phi), Phi : S' -> S."""

    def __init__(self, S, Sp, D, basis):
        self.S, self.Sp, self.D = S, Sp, D
        self.field = S.field
        self.basis = basis

    @property
    def dimension(self):
        return self.basis.shape[0]

    def _blk(self):
        return self.S.r ** 2 * self.field.e

    def matrix(self, v):
        F, r = self.field, self.S.r
        e = F.e
        blk = self._blk()
        rows = []
        for i in range(r):
            row = []
            for j in range(r):
                cs = []
                for mu in range(self.D + 1):
                    off = mu * blk + (i * r + j) * e
                    cs.append(F.from_digits([int(t) for t in v[off:off + e]]))
                row.append(Poly(F, cs))
            rows.append(tuple(row))
        return tuple(rows)

    def basis_matrices(self):
        return [self.matrix(v) for v in self.basis]

    def vector(self, Phi):
        F, r = self.field, self.S.r
        blk = self._blk()
        out = np.zeros((self.D + 1) * blk, dtype=np.int64)
        for i in range(r):
            for j in range(r):
                x = Phi[i][j]
                if x.degree() > self.D:
                    return None
                for mu, c in enumerate(x.coeffs):
                    off = mu * blk + (i * r + j) * F.e
                    out[off:off + F.e] = F.digits(c)
        return out

    def contains(self, Phi):
        v = self.vector(Phi)
        if v is None:
            return False
        if self.dimension == 0:
            return not v.any()
        return fplinalg.in_span(v, self.basis, self.field.p)

    def combination(self, coeffs):
        v = (np.asarray(coeffs, dtype=np.int64) @ self.basis) % self.field.p
        return self.matrix(v)

    def report(self, Phi):
        return isogeny_report(self.S, self.Sp, Phi)


def _poly_coeff_matrices(U, n):
    r = len(U)
    return [[[U[i][j][nu] for j in range(r)] for i in range(r)] for nu in range(n)]


def sheaf_isogeny_solve(S, Sp, D, regular=False):
    """All polynomial Phi of degree <= D with Phi U' = U sigma(Phi), where
    U = Pi_0^-1 tau_0 for S and U' likewise for S'.  Coefficients of t^mu
    give Phi_mu U'_0 - U_0 sigma(Phi_mu) = sum_{nu>=1} (U_nu sigma(Phi_{mu-nu})
    - Phi_{mu-nu} U'_nu), solved together as one F_p-linear system.

    With ``regular`` the entries obey the degree bounds of a map
    F'_0 -> F_0, so Phi has no pole at oo on level 0."""
    if S.field is not Sp.field or S.r != Sp.r or S.q != Sp.q:
        raise ValueError("sheaves must share field, ground field and rank")
    F, r = S.field, S.r
    U = S.C_prime_matrix()
    Up = Sp.C_prime_matrix()
    du, dup = pm_degree(U), pm_degree(Up)
    top = max(du, dup)
    Uc = _poly_coeff_matrices(U, top + 1)
    Upc = _poly_coeff_matrices(Up, top + 1)
    ident = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    zero = [[0] * r for _ in range(r)]
    E = []
    for nu in range(top + 1):
        sys_ = SemilinearSystem(F, S.q, ident, Uc[nu], zero, x_shape=(r, r), Cr=Upc[nu], Dr=ident)
        E.append(linearize_semilinear(sys_)[0])
    blk = r * r * F.e
    nrows = (D + top + 1) * blk
    A = np.zeros((nrows, (D + 1) * blk), dtype=np.int64)
    for mu in range(D + top + 1):
        for j in range(D + 1):
            nu = mu - j
            if 0 <= nu <= top:
                A[mu * blk:(mu + 1) * blk, j * blk:(j + 1) * blk] = E[nu]
    if regular:
        n, n_src = S.n(0), Sp.n(0)
        extra = []
        for mu in range(D + 1):
            for i in range(r):
                for j in range(r):
                    if mu > n[i] - n_src[j]:
                        for c in range(F.e):
                            row = np.zeros((D + 1) * blk, dtype=np.int64)
                            row[mu * blk + (i * r + j) * F.e + c] = 1
                            extra.append(row)
        if extra:
            A = np.concatenate([A, np.array(extra)], axis=0)
    ker = fplinalg.nullspace(A % F.p, F.p)
    return SheafIsogenySpace(S, Sp, D, ker)


def transport_matrices(S, Sp, Phi):
    """Phi_i = (Pi_{i-1}..Pi_0) Phi (Pi'_{i-1}..Pi'_0)^-1 : F'_i -> F_i."""
    F, r = S.field, S.r
    out = []
    for i in range(S.l):
        A = pm_product([S.Pi[j] for j in range(i - 1, -1, -1)], F, r)
        B = pm_product([Sp.Pi[j] for j in range(i - 1, -1, -1)], F, r)
        out.append(mat_mul(A, mat_mul(Phi, pm_inverse(B))))
    return out


def find_sheaf_isomorphism(S, Sp, D=0, rng=None, tries=2000):
    """An isomorphism S' -> S of abelian sheaves among the regular solutions
    of degree <= D, or None.  Small spaces are enumerated."""
    import itertools
    import random
    space = sheaf_isogeny_solve(S, Sp, D, regular=True)
    p, dim = S.field.p, space.dimension
    if dim == 0:
        return None
    if p ** dim <= 20000:
        candidates = itertools.product(range(p), repeat=dim)
    else:
        rng = rng or random.Random(0)
        candidates = ([rng.randrange(p) for _ in range(dim)] for _ in range(tries))
    for coeffs in candidates:
        if not any(coeffs):
            continue
        Phi = space.combination(coeffs)
        if pm_det(Phi).degree() != 0:
            continue
        phis = transport_matrices(S, Sp, Phi)
        if is_ladder_isomorphism(S, Sp, phis):
            return Phi
    return None


def isogeny_report(S, Sp, Phi):
    """Exactness of Phi U' = U sigma(Phi), injectivity and pole orders at oo
    of the induced maps F'_i -> F_i."""
    U, Up = S.C_prime_matrix(), Sp.C_prime_matrix()
    rel = pm_equal(mat_mul(Phi, Up), mat_mul(U, mat_sigma(Phi, S.q)))
    Dt = pm_det(Phi)
    poles = []
    for i, Phi_i in enumerate(transport_matrices(S, Sp, Phi)):
        loc = local_matrix(Phi_i, Sp.n(i), S.n(i))
        v = min((x.val for row in loc for x in row if x.coeffs), default=0)
        poles.append(max(0, -v))
    injective = not Dt.is_zero()
    return {
        "relation": rel,
        "injective": injective,
        "det_degree": Dt.degree() if injective else None,
        "invertible_on_C_prime": injective and Dt.degree() == 0,
        "pole_orders_at_infinity": poles,
        "isogeny": rel and injective and not any(poles),
    }


# ---------------------------------------------------------------------------
# pullback along a quasi-isogeny of the completion


def pullback_by_formal_isogeny(S, Phi_hat):
    """Glue F_i|C' with the lattices Phi_hat_i(F-hat_i) at oo.

    ``Phi_hat`` is an rl x rl matrix on the completion that respects the
    grading (block diagonal).  Returns (new sheaf, bases P_i), where the
    columns of P_i express the new F_i in the coordinates of F_i over C'.
    """
    K = completion_field(S)
    S2 = S.base_change(K)
    r, l = S.r, S.l
    for a in range(l):
        for b in range(l):
            if a != b and any(Phi_hat[a * r + x][b * r + y].coeffs
                              for x in range(r) for y in range(r)):
                raise ValueError("Phi-hat must be block diagonal")
    P, ns = [], []
    for i in range(l):
        blk = tuple(tuple(Phi_hat[i * r + x][i * r + y] for y in range(r)) for x in range(r))
        B = mat_mul(_twist_basis(K, S2.n(i)), blk)
        Pi_, ni = split_bundle(B, K)
        P.append(Pi_)
        ns.append(ni)
    new = _build_from_bases(S2, P, ns, K)
    return new, P

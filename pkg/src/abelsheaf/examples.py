"""Worked examples: the standard isoclinic sheaves and their formal modules,
the Vandermonde trivialisation, the r = d = 2 family, the Artin-Schreier
quasi-isogenies and the regression corpus."""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass

from . import klinalg
from .errors import MalformedInput
from .gf import FqElement, artin_schreier_solve, embed, make_field
from .isocrystal import DieudonneModule, newton_polygon
from .motive import (AbelianSheafP1, in_isoclinic_locus, isogeny_report, pm_det,
                     pm_identity, tau_invariants, validate_sheaf)
from .polygon import is_straight_line
from .series import CharValue, Poly, TruncSeries
from .smat import block_diag, block_matrix, mat_mul, mat_sigma, power

MAX_RANK = 8


def ground_field(q):
    p = _prime_of(q)
    return make_field(p, round(math.log(q, p)))


def _prime_of(q):
    for p in range(2, q + 1):
        if q % p == 0:
            return p
    raise ValueError(f"bad field size {q}")


# ---------------------------------------------------------------------------
# the standard sheaves


@dataclass(frozen=True)
class StandardModuleSpec:
    k: int
    l: int
    e: int = 1
    q: int = 2

    def __post_init__(self):
        if self.k < 1 or self.l < 1 or self.e < 1 or math.gcd(self.k, self.l) != 1:
            raise MalformedInput("need coprime positive k, l and e >= 1")

    @property
    def r(self):
        return self.e * self.l

    @property
    def d(self):
        return self.e * self.k


def _cyclic(field, l, corner):
    """l x l matrix with ones below the diagonal and ``corner`` at (0, l-1)."""
    one, zero = Poly.one(field), Poly.zero(field)
    rows = []
    for a in range(l):
        row = []
        for b in range(l):
            if l == 1 or (a == 0 and b == l - 1):
                row.append(corner)
            elif a == b + 1:
                row.append(one)
            else:
                row.append(zero)
        rows.append(tuple(row))
    return tuple(rows)


def standard_sheaf(spec, field=None, zeta=0):
    """M_i = O(k oo)^i + O^(l-i), repeated e times, with cyclic tau_i.

    The corner of tau_i is (1 - zeta t)^k, so zeta = 0 gives the sheaf over
    the fibre at oo.
    """
    if spec.r > MAX_RANK:
        raise ValueError(f"rank {spec.r} exceeds the cap {MAX_RANK}")
    K = field or ground_field(spec.q)
    k, l, e = spec.k, spec.l, spec.e
    z = zeta if isinstance(zeta, CharValue) else CharValue(K, zeta)
    corner = Poly(K, [1, K.neg(z.value)]) ** k
    T = _cyclic(K, l, corner)
    tau = block_diag(*([T] * e))
    Pi = pm_identity(K, spec.r)
    splitting = []
    for i in range(l):
        splitting.append([k if j < i else 0 for j in range(l)] * e)
    return AbelianSheafP1(K, spec.q, spec.r, spec.d, splitting, [Pi] * l, [tau] * l, z)


def formal_standard(spec, precision=None, zeta=0):
    """The formal module over F_{q^l} (zeta an encoding in F_q): Pi and F block cyclic, F with blocks T whose
    corner is (z - zeta)^k, Pi_i = diag with z^k in row i.  Each block is
    repeated e times along the diagonal."""
    K0 = ground_field(spec.q)
    g = K0.ground_degree(spec.q)
    K = make_field(K0.p, g * spec.l)
    z0 = embed(K0, K).map_int(zeta)
    k, l, e = spec.k, spec.l, spec.e
    corner = TruncSeries.one(K)
    for _ in range(k):
        corner = corner * TruncSeries(K, 0, [K.neg(z0), 1])
    one, zero = TruncSeries.one(K), TruncSeries.zero(K)
    T = tuple(tuple(corner if (l == 1 or (a == 0 and b == l - 1)) else (one if a == b + 1 else zero)
                    for b in range(l)) for a in range(l))
    zk = TruncSeries.monomial(K, 1, k)
    n = spec.r
    zero_blk = tuple(tuple(zero for _ in range(n)) for _ in range(n))
    Fb = [[zero_blk] * l for _ in range(l)]
    Pb = [[zero_blk] * l for _ in range(l)]
    for i in range(l):
        j = (i + 1) % l
        Fb[j][i] = block_diag(*([T] * e))
        P = tuple(tuple((zk if a == i else one) if a == b else zero for b in range(l)) for a in range(l))
        Pb[j][i] = block_diag(*([P] * e))
    U = block_matrix(Fb)
    M = DieudonneModule(K, spec.q, U, spec.d * l, CharValue(K, z0), precision)
    M.Pi = block_matrix(Pb)
    M.ell = l
    return M


def standard_identity_holds(M, spec):
    """F^l = z^k sigma^l exactly."""
    A = power(M.F, spec.l).A
    n = len(A)
    for a in range(n):
        for b in range(n):
            want = TruncSeries.monomial(M.field, 1, spec.k) if a == b else TruncSeries.zero(M.field)
            if A[a][b] != want:
                return False
    return True


def standard_check(spec):
    M = formal_standard(spec)
    P = newton_polygon(M)
    line = is_straight_line(P) and P.breaks[-1] == (M.rank, spec.d * spec.l) and P.certified
    return {"F_pow_l_eq_zk": standard_identity_holds(M, spec), "newton_straight_line": bool(line)}


# ---------------------------------------------------------------------------
# the Vandermonde matrix and the group J


def vandermonde_J(lam, e, q):
    """Block diagonal V_e with V[i][j] = lam^(j q^i); lam generates
    F_{q^l} over F_q where l = [F_q(lam) : F_q]."""
    L = lam.field
    g = L.ground_degree(q)
    conj = [lam.v]
    while True:
        nxt = L.frob(conj[-1], g)
        if nxt == lam.v:
            break
        conj.append(nxt)
    l = len(conj)
    if l * g != L.e:
        raise ValueError("lambda does not generate its field over F_q")
    V = [[L.pow(c, j) for j in range(l)] for c in conj]
    n = l * e
    out = [[0] * n for _ in range(n)]
    for blk in range(e):
        for a in range(l):
            for b in range(l):
                out[blk * l + a][blk * l + b] = V[a][b]
    return out


def _const_pmat(L, M):
    return tuple(tuple(Poly(L, [x]) for x in row) for row in M)


def j_group_check(g, V, q):
    """sigma(V^-1 g V) = V^-1 g V and g invertible; g a polynomial matrix
    over the field of V (denominators from F_q[t] are sigma-fixed)."""
    L = g[0][0].field
    Vp = _const_pmat(L, V)
    Vinv = _const_pmat(L, klinalg.inverse(V, L))
    H = mat_mul(Vinv, mat_mul(g, Vp))
    fixed = all(x == x.sigma(q) for row in H for x in row)
    return bool(fixed and not pm_det(g).is_zero())


def j_conjugate(h, V):
    """V h V^-1 for h over F_q[t] (given as a polynomial matrix over the
    field of V)."""
    L = h[0][0].field
    return mat_mul(_const_pmat(L, V), mat_mul(h, _const_pmat(L, klinalg.inverse(V, L))))


def cyclic_permutation(field, l, e):
    """The block permutation U = Pi_0^-1 tau_0 of the standard sheaf at
    zeta = 0 as an integer matrix."""
    n = l * e
    out = [[0] * n for _ in range(n)]
    for blk in range(e):
        for a in range(l):
            b = (a - 1) % l
            out[blk * l + a][blk * l + b] = 1
    return out


def level_trivialization(spec, lam=None):
    """psi = V_e^-1 carries (M|C', P sigma) to (O^r, Id sigma), because
    sigma(V_e) = P^-1 V_e.  Returns the matrices and both checks."""
    K0 = ground_field(spec.q)
    L = make_field(K0.p, K0.e * spec.l)
    if lam is None:
        lam = FqElement(L, _generator(L, spec.q, spec.l))
    V = vandermonde_J(lam, spec.e, spec.q)
    P = cyclic_permutation(L, spec.l, spec.e)
    g = L.ground_degree(spec.q)
    sV = [[L.frob(x, g) for x in row] for row in V]
    Pinv = klinalg.inverse(P, L)
    ident = _imat(L, Pinv, V) == sV
    psi = klinalg.inverse(V, L)
    spsi = [[L.frob(x, g) for x in row] for row in psi]
    inter = _imat(L, psi, P) == spsi
    return {"V": V, "psi": psi, "sigma_V_eq_Pinv_V": ident, "psi_intertwines": inter}


def _imat(F, A, B):
    from .smat import int_mat_mul
    return int_mat_mul(F, A, B)


def _generator(L, q, l):
    g = L.ground_degree(q)
    for x in range(1, L.order):
        conj = {x}
        y = x
        for _ in range(l - 1):
            y = L.frob(y, g)
            conj.add(y)
        if len(conj) == l:
            return x
    raise ValueError("no generator")


def w_formula(spec, g):
    """W^{+e} for g an l x l matrix over F_{q^l}((z)): block i is
    W_i g W_i^-1 with W_i = diag(z^k Id_i, Id_{l-i})."""
    k, l, e = spec.k, spec.l, spec.e
    blocks = []
    for i in range(l):
        blk = tuple(tuple(g[a][b].shift(k * ((a < i) - (b < i))) for b in range(l)) for a in range(l))
        blocks.append(block_diag(*([blk] * e)))
    return block_diag(*blocks)


# ---------------------------------------------------------------------------
# the r = d = 2 family


class M22Point:
    """(K, zeta, a) with tr a = -2 zeta and det a = zeta^2."""

    def __init__(self, field, zeta, a):
        F = field
        self.field = F
        self.zeta = zeta
        self.a = [[int(x) for x in row] for row in a]
        (a11, a12), (a21, a22) = self.a
        tr_ok = F.add(a11, a22) == F.neg(F.add(zeta, zeta))
        det_ok = F.sub(F.mul(a11, a22), F.mul(a12, a21)) == F.mul(zeta, zeta)
        if not (tr_ok and det_ok):
            raise MalformedInput("trace must be -2 zeta and determinant zeta^2")

    def key(self):
        return (self.zeta, tuple(self.a[0]), tuple(self.a[1]))


def m22_sheaf(pt, q):
    """F_i = O(i oo)^2 and tau_i = 1 + t a."""
    K = pt.field
    tau = tuple(tuple(Poly(K, [1 if i == j else 0, pt.a[i][j]]) for j in range(2)) for i in range(2))
    return AbelianSheafP1(K, q, 2, 2, [[0, 0]], [pm_identity(K, 2)], [tau], CharValue(K, pt.zeta))


def nilpotent_points(K):
    """All trace 0, determinant 0 matrices over K."""
    pts = []
    for a11, a12, a21 in itertools.product(range(K.order), repeat=3):
        a22 = K.neg(a11)
        if K.sub(K.mul(a11, a22), K.mul(a12, a21)) == 0:
            pts.append(M22Point(K, 0, [[a11, a12], [a21, a22]]))
    return pts


def pink_membership(pt, q):
    """a = 0, or a rank one nilpotent whose kernel line is F_q-rational."""
    K = pt.field
    a = pt.a
    if not any(any(row) for row in a):
        return True
    row = a[0] if any(a[0]) else a[1]
    x, y = row[1], K.neg(row[0])  # kernel vector of the row
    if x == 0 or y == 0:
        return True
    return K.is_in_subfield(K.mul(y, K.inv(x)), q)


def m22_scan(q, m):
    """Newton side vs Pink side over F_{q^m} at zeta = 0."""
    K0 = ground_field(q)
    if q ** m > 81:
        raise ValueError("scan capped at q^m <= 81")
    K = make_field(K0.p, K0.e * m)
    rows = []
    for pt in nilpotent_points(K):
        newton = in_isoclinic_locus(m22_sheaf(pt, q))
        pink = pink_membership(pt, q)
        rows.append((pt.key(), {"a": [[list(K.digits(x)) for x in row] for row in pt.a],
                                "in_Z": bool(newton), "pink": bool(pink)}))
    rows = [row for _, row in sorted(rows, key=lambda kv: kv[0])]
    in_z = sum(r["in_Z"] for r in rows)
    pink = sum(r["pink"] for r in rows)
    return {
        "q": q, "m": m,
        "total": len(rows),
        "in_Z": in_z,
        "pink_count": pink,
        "pink_formula": 1 + (q + 1) * (K.order - 1),
        "pink_agrees": all(r["in_Z"] == r["pink"] for r in rows),
        "points": rows,
    }


# ---------------------------------------------------------------------------
# the Artin-Schreier family


def ex96_sheaf(mm, b, q):
    """F_0 = O(mm oo) + O(-mm oo), tau_0 = (1, b; 0, 1), Pi_0 = Id."""
    K = b.field
    if b[0] != 0:
        raise MalformedInput("b(0) must vanish")
    if b.degree() > 2 * mm + 1:
        raise MalformedInput("deg b exceeds 2 mm + 1")
    one, zero = Poly.one(K), Poly.zero(K)
    tau = ((one, b), (zero, one))
    return AbelianSheafP1(K, q, 2, 2, [[mm, -mm]], [pm_identity(K, 2)], [tau])


def ex96_quasi_isogeny(S):
    """Phi = (1, u; 0, 1) with u_i^q - u_i + b_i = 0, as a map from the
    trivial sheaf (tau = Id) to S over C'.  Returns (Phi, field, report)."""
    K, q = S.field, S.q
    b = S.tau[0][0][1]
    us = []
    L = K
    for c in b.coeffs:
        if c == 0:
            us.append((K, 0))
            continue
        sols, ext = artin_schreier_solve(FqElement(K, c), q)
        us.append((sols[0].field, sols[0].v))
        if sols[0].field.e > L.e:
            L = sols[0].field
    coeffs = []
    for fld, v in us:
        coeffs.append(embed(fld, L).map_int(v) if fld is not L else v)
    u = Poly(L, coeffs)
    one, zero = Poly.one(L), Poly.zero(L)
    Phi = ((one, u), (zero, one))
    SL = S.base_change(L)
    triv = AbelianSheafP1(L, q, 2, 2, [[0, 0]], [pm_identity(L, 2)], [pm_identity(L, 2)])
    rep = isogeny_report(SL, triv, Phi)
    return Phi, L, rep


# ---------------------------------------------------------------------------
# the family with non-trivial level automorphisms


def remark42_sheaf(n, f, q, zeta=0):
    """F_i = O((i+n) oo) + O(i oo) and tau = (1 - zeta t, f; 0, 1 - zeta t)."""
    K = f.field
    c = Poly(K, [1, K.neg(zeta)])
    tau = ((c, f), (Poly.zero(K), c))
    return AbelianSheafP1(K, q, 2, 2, [[n, 0]], [pm_identity(K, 2)], [tau], CharValue(K, zeta))


def remark42_automorphisms(n, f, x, q, a=None, zeta=0):
    """(1, x a; 0, 1) commutes with tau and is the identity modulo a."""
    K = f.field
    if f.degree() > n + 1:
        raise ValueError("deg f exceeds n + 1")
    a = a if a is not None else Poly.t(K) ** n
    if a.degree() != n:
        raise ValueError("a must have degree n")
    S = remark42_sheaf(n, f, q, zeta)
    one, zero = Poly.one(K), Poly.zero(K)
    g = ((one, a.scale(x)), (zero, one))
    tau = S.tau[0]
    commutes = mat_mul(g, tau) == mat_mul(tau, mat_sigma(g, q))
    mod_ok = all(((g[i][j] - (one if i == j else zero)) % a).is_zero() for i in range(2) for j in range(2))
    return bool(commutes and mod_ok)


# ---------------------------------------------------------------------------
# corpus


CORPUS_VERSION = "v1"


def _dump(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def corpus_documents():
    """All golden documents, keyed by file name."""
    docs = {}
    grid = [(1, 2), (1, 3), (2, 3), (3, 4)]
    std = []
    for (k, l), e, q in itertools.product(grid, (1, 2), (2, 3)):
        spec = StandardModuleSpec(k, l, e, q)
        res = standard_check(spec)
        rep = validate_sheaf(standard_sheaf(spec)) if spec.r <= MAX_RANK else None
        std.append({"k": k, "l": l, "e": e, "q": q, **res,
                    "sheaf_valid": None if rep is None else rep["valid"]})
    docs["standard.json"] = std
    for q, m in ((2, 1), (2, 2), (3, 1), (3, 2)):
        docs[f"m22_scan_q{q}_m{m}.json"] = m22_scan(q, m)
    ex = []
    for q, coeffs in ((2, [0, 1]), (3, [0, 0, 0, 1]), (2, [0, 1, 1, 1])):
        K = ground_field(q)
        S = ex96_sheaf(1, Poly(K, coeffs), q)
        Phi, L, rep = ex96_quasi_isogeny(S)
        ex.append({"q": q, "b": coeffs, "field": L.spec,
                   "u": [list(L.digits(c)) for c in Phi[0][1].coeffs], "report": rep,
                   "isoclinic": bool(in_isoclinic_locus(S))})
    docs["ex96.json"] = ex
    inv = []
    for q in (2, 3):
        spec = StandardModuleSpec(1, 2, 1, q)
        S = standard_sheaf(spec)
        L = make_field(S.field.p, S.field.e * 2)
        for a in ([0, 1], [1, 1, 1] if q == 2 else [1, 0, 1]):
            T = tau_invariants(S, Poly(S.field, a), L)
            inv.append({"q": q, "a": a, "field": L.spec, "dimension_Fp": T.dimension,
                        "cardinality": T.cardinality})
    docs["tau_invariants.json"] = inv
    lev = []
    for k, l, e, q in ((1, 2, 1, 2), (1, 3, 1, 2), (2, 3, 1, 2), (1, 2, 2, 3)):
        res = level_trivialization(StandardModuleSpec(k, l, e, q))
        L = make_field(ground_field(q).p, ground_field(q).e * l)
        enc = lambda A: [[list(L.digits(x)) for x in row] for row in A]
        lev.append({"k": k, "l": l, "e": e, "q": q, "field": L.spec,
                    "V": enc(res["V"]), "psi": enc(res["psi"]),
                    "sigma_V_eq_Pinv_V": res["sigma_V_eq_Pinv_V"],
                    "psi_intertwines": res["psi_intertwines"]})
    docs["level_trivialization.json"] = lev
    docs["w_formula.json"] = [w_formula_vector(StandardModuleSpec(k, l, 1, 2))
                              for k, l in ((1, 2), (1, 3), (2, 3))]
    return docs


def w_formula_vector(spec):
    """W^{+e} for g = V h V^-1 with h the unipotent (1, 1; 0, 1) padded by
    the identity, and whether it satisfies W U = U sigma(W) on M-hat."""
    M = formal_standard(spec)
    L = M.field
    V = vandermonde_J(FqElement(L, _generator(L, spec.q, spec.l)), 1, spec.q)
    n = spec.l
    h = [[1 if i == j or (i, j) == (0, 1) else 0 for j in range(n)] for i in range(n)]
    g = _imat(L, _imat(L, V, h), klinalg.inverse(V, L))
    gs = tuple(tuple(TruncSeries(L, 0, [x]) for x in row) for row in g)
    W = w_formula(spec, gs)
    rel = mat_mul(W, M.U) == mat_mul(M.U, mat_sigma(W, spec.q))
    enc = lambda s: {"val": s.val, "coeffs": [list(L.digits(c)) for c in s.coeffs]}
    return {"k": spec.k, "l": spec.l, "e": spec.e, "q": spec.q, "field": L.spec,
            "g": [[list(L.digits(x)) for x in row] for row in g],
            "W": [[enc(x) for x in row] for row in W], "relation": bool(rel)}


def generate_corpus(outdir):
    """Write the golden documents under outdir/<version>/ and return the
    list of written paths."""
    base = os.path.join(outdir, CORPUS_VERSION)
    os.makedirs(base, exist_ok=True)
    paths = []
    for name, doc in sorted(corpus_documents().items()):
        path = os.path.join(base, name)
        _dump(path, doc)
        paths.append(path)
    return paths

"""Independent reference computations.

Nothing here calls the solver, Smith form, Newton or hull code under test:
fields are rebuilt from scratch, determinants are permutation expansions,
hulls are pointwise minima and solution sets are found by exhaustion.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


# ---------------------------------------------------------------------------
# finite fields from first principles


def _poly_mod(a, m, p):
    a = list(a)
    while len(a) >= len(m):
        c = a[-1] % p
        if c:
            shift = len(a) - len(m)
            for i, mc in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mc) % p
        a.pop()
    return [x % p for x in a]


def _monic_polys(p, deg):
    for tail in itertools.product(range(p), repeat=deg):
        yield list(tail) + [1]


def is_irreducible(f, p):
    deg = len(f) - 1
    for d in range(1, deg // 2 + 1):
        for g in _monic_polys(p, d):
            if not any(_poly_mod(f, g, p)):
                return False
    return True


def smallest_irreducible(p, e):
    """Lex-smallest monic irreducible under (c_{e-1}, ..., c_0) order."""
    if e == 1:
        return [0, 1]
    for rev in itertools.product(range(p), repeat=e):
        f = list(reversed(rev)) + [1]
        if is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial")


class NaiveField:
    """F_p[x]/(m) with elements encoded as base-p integers (digit i is the
    coefficient of x^i)."""

    def __init__(self, p, e):
        self.p, self.e = p, e
        self.modulus = smallest_irreducible(p, e)
        self.order = p ** e

    def digits(self, v):
        return [(v // self.p ** i) % self.p for i in range(self.e)]

    def encode(self, ds):
        return sum((c % self.p) * self.p ** i for i, c in enumerate(ds))

    def add(self, a, b):
        return self.encode([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        return self.encode([-x for x in self.digits(a)])

    def mul(self, a, b):
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.e - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] += x * y
        return self.encode(_poly_mod(prod, self.modulus, self.p) + [0] * self.e)

    def pow(self, a, n):
        out = 1
        for _ in range(n):
            out = self.mul(out, a)
        return out


# ---------------------------------------------------------------------------
# determinants by permutation expansion


def _sign(perm):
    s = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                s = -s
    return s


def det_perm(A, zero, one):
    n = len(A)
    total = zero
    for perm in itertools.permutations(range(n)):
        term = one
        for i in range(n):
            term = term * A[i][perm[i]]
        total = total + term if _sign(perm) > 0 else total - term
    return total


def minors(A, k):
    n, m = len(A), len(A[0])
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.combinations(range(m), k):
            yield [[A[i][j] for j in cols] for i in rows]


def smith_exponents_by_minors(A, zero, one):
    """Elementary divisor exponents from determinantal divisors: the k-th
    exponent is d_k - d_{k-1}, d_k the minimum valuation of k x k minors."""
    n = min(len(A), len(A[0]))
    ds = [0]
    for k in range(1, n + 1):
        vals = [det_perm(B, zero, one) for B in minors(A, k)]
        vals = [v.val for v in vals if v.coeffs]
        if not vals:
            break
        ds.append(min(vals))
    return [ds[i] - ds[i - 1] for i in range(1, len(ds))]


# ---------------------------------------------------------------------------
# polygons


def lower_envelope(points, x):
    """Value at x of the lower convex envelope of finitely many points."""
    best = None
    for (x0, y0), (x1, y1) in itertools.combinations_with_replacement(sorted(points), 2):
        if x0 == x1:
            if x0 == x:
                cand = min(y0, y1)
            else:
                continue
        elif x0 <= x <= x1:
            cand = Fraction(y0) + (Fraction(y1) - y0) * (x - x0) / (x1 - x0)
        else:
            continue
        best = cand if best is None else min(best, cand)
    return best


def polygon_from_slopes(slopes):
    """Break values at integer x of the polygon with these slopes."""
    ys = [Fraction(0)]
    for s in sorted(Fraction(x) for x in slopes):
        ys.append(ys[-1] + s)
    return ys


# ---------------------------------------------------------------------------
# equations by exhaustion


def artin_schreier_by_exhaustion(F, b, q):
    """All u in F with u^q - u + b = 0."""
    return sorted(u for u in range(F.order) if F.add(F.sub(F.pow(u, q), u), b) == 0)


def pink_locus_by_conjugation(K, q):
    """Union over g in GL_2(F_q) of g (0, x; 0, 0) g^-1, x in K, as a set of
    matrices (a11, a12, a21, a22)."""
    sub = [x for x in range(K.order) if K.pow(x, q) == x]
    out = set()
    for g11, g12, g21, g22 in itertools.product(sub, repeat=4):
        dt = K.sub(K.mul(g11, g22), K.mul(g12, g21))
        if dt == 0:
            continue
        di = K.inv(dt)
        # g^-1 = di * (g22, -g12; -g21, g11)
        h11, h12 = K.mul(di, g22), K.mul(di, K.neg(g12))
        h21, h22 = K.mul(di, K.neg(g21)), K.mul(di, g11)
        for x in range(K.order):
            # g (0 x; 0 0) = (0, g11 x; 0, g21 x)
            c1, c2 = K.mul(g11, x), K.mul(g21, x)
            out.add((K.mul(c1, h21), K.mul(c1, h22), K.mul(c2, h21), K.mul(c2, h22)))
    return out


def tau_fixed_vectors_by_exhaustion(U, a, L, q):
    """All v in (L[t]/a)^r with U sigma(v) = v mod a, U a polynomial matrix
    over L.  Returns the count."""
    from abelsheaf.series import Poly
    r = len(U)
    n = a.degree()
    count = 0
    coords = itertools.product(range(L.order), repeat=r * n)
    for flat in coords:
        v = [Poly(L, list(flat[i * n:(i + 1) * n])) for i in range(r)]
        ok = True
        for i in range(r):
            acc = Poly.zero(L)
            for j in range(r):
                acc = acc + U[i][j] * v[j].sigma(q)
            if not ((acc - v[i]) % a).is_zero():
                ok = False
                break
        count += ok
    return count


def semilinear_solutions_by_exhaustion(F, q, C, D, R):
    """All 1-column X over F with C X - D sigma(X) = R (integer matrices)."""
    n = len(C[0])
    sols = []
    for xs in itertools.product(range(F.order), repeat=n):
        ok = True
        for i in range(len(C)):
            acc = 0
            for j in range(n):
                acc = F.add(acc, F.mul(C[i][j], xs[j]))
                acc = F.sub(acc, F.mul(D[i][j], F.pow(xs[j], q)))
            if acc != R[i]:
                ok = False
                break
        if ok:
            sols.append(list(xs))
    return sols

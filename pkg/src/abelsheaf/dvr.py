"""Linear algebra over the discrete valuation ring K[[z]] and its fraction
field K((z)), on matrices of ``TruncSeries``.

Exact (Laurent polynomial) inputs are truncated to a working precision;
the routines double it a few times when a pivot cannot be certified.
"""
from __future__ import annotations

from .errors import InsufficientPrecision
from .series import INF, TruncSeries

_MAX_DOUBLINGS = 4


def _max_degree(A):
    d = 0
    for r in A:
        for a in r:
            if a.coeffs:
                d = max(d, a.degree() - min(0, a.val))
    return d


def default_precision(A):
    n = max(len(A), len(A[0]) if A else 0)
    return 4 * (n * (_max_degree(A) + 1)) + 8


def _prepare(A, prec):
    return [[a.truncate(prec) for a in r] for r in A]


def _with_retry(fn, A, prec):
    given = min((a.prec for r in A for a in r), default=INF)
    if prec is None and given != INF:
        return fn(_prepare(A, given))
    N = prec if prec is not None else default_precision(A)
    last = None
    for _ in range(_MAX_DOUBLINGS + 1):
        try:
            return fn(_prepare(A, min(N, given)))
        except InsufficientPrecision as exc:
            last = exc
            if N >= given or prec is not None:
                break
            N *= 2
    raise last


def _pick_pivot(cells):
    """cells: iterable of (key, series) in tie-break order.  Returns the key
    of the certified minimum-valuation entry, None if every entry is an exact
    zero, and raises when the minimum is not certified."""
    best = None
    best_val = INF
    unknown_floor = INF
    for key, a in cells:
        if a.coeffs:
            if a.val < best_val:
                best, best_val = key, a.val
        elif a.prec != INF:
            unknown_floor = min(unknown_floor, a.prec)
    if best is None:
        if unknown_floor != INF:
            raise InsufficientPrecision("pivot is a known-zero entry of unknown valuation", unknown_floor)
        return None
    if unknown_floor < best_val:
        raise InsufficientPrecision("a known-zero entry may have smaller valuation than the pivot",
                                    unknown_floor)
    return best


def _smith_exponents(A):
    m = len(A)
    n = len(A[0]) if m else 0
    exps = []
    for k in range(min(m, n)):
        cells = ((( i, j), A[i][j]) for i in range(k, m) for j in range(k, n))
        piv = _pick_pivot(cells)
        if piv is None:
            break
        i0, j0 = piv
        A[k], A[i0] = A[i0], A[k]
        for row in A:
            row[k], row[j0] = row[j0], row[k]
        a = A[k][k]
        exps.append(a.val)
        inv_a = a.invert()
        for i in range(k + 1, m):
            if A[i][k].coeffs or A[i][k].prec != INF:
                f = A[i][k] * inv_a
                rk = A[k]
                ri = A[i]
                for j in range(k + 1, n):
                    ri[j] = ri[j] - f * rk[j]
                ri[k] = TruncSeries.zero(a.field)
    return sorted(exps)


def smith_exponents(A, prec=None):
    """Elementary divisor exponents (ascending) of a matrix over K((z)).

    The length equals the rank.  Pivot: minimum valuation, first in
    row-major order.
    """
    return _with_retry(_smith_exponents, A, prec)


def _column_hermite(G):
    r = len(G)
    k = len(G[0]) if r else 0
    F = G[0][0].field
    for i in range(r):
        piv = _pick_pivot(((j, G[i][j]) for j in range(i, k)))
        if piv is None:
            raise ValueError("generators do not span a full-rank lattice")
        for row in G:
            row[i], row[piv] = row[piv], row[i]
        a = G[i][i]
        v = a.val
        inv_a = a.invert()
        # normalise the pivot to exactly z^v
        u = inv_a.shift(v)
        for row in G[i:]:
            row[i] = row[i] * u
        G[i][i] = TruncSeries.monomial(F, 1, v)
        for j in range(i + 1, k):
            g = G[i][j]
            if g.coeffs or g.prec != INF:
                f = g.shift(-v)
                for row in G[i + 1:]:
                    row[j] = row[j] - f * row[i]
                G[i][j] = TruncSeries.zero(F)
    return tuple(tuple(row[:r]) for row in G)


def column_hermite(G, prec=None):
    """Lower triangular basis (pivots exactly z^v) of the K[[z]]-span of the
    columns of an r x k matrix of full row rank."""
    return _with_retry(_column_hermite, G, prec)


def _inverse(A):
    n = len(A)
    F = A[0][0].field
    one, zero = TruncSeries.one(F), TruncSeries.zero(F)
    M = [list(A[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = _pick_pivot(((i, M[i][k]) for i in range(k, n)))
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[k], M[piv] = M[piv], M[k]
        inv_a = M[k][k].invert()
        M[k] = [x * inv_a for x in M[k]]
        for i in range(n):
            if i != k:
                f = M[i][k]
                if f.coeffs or f.prec != INF:
                    M[i] = [x - f * y for x, y in zip(M[i], M[k])]
    return tuple(tuple(row[n:]) for row in M)


def mat_inverse(A, prec=None):
    """Inverse over K((z))."""
    return _with_retry(_inverse, A, prec)


def lower_triangular_inverse(B):
    """Inverse of a lower triangular matrix whose diagonal is monomial."""
    n = len(B)
    F = B[0][0].field
    zero = TruncSeries.zero(F)
    X = [[zero] * n for _ in range(n)]
    for j in range(n):
        for i in range(j, n):
            acc = TruncSeries.one(F) if i == j else zero
            for k in range(j, i):
                if B[i][k].coeffs or B[i][k].prec != INF:
                    acc = acc - B[i][k] * X[k][j]
            X[i][j] = acc * B[i][i].invert()
    return tuple(tuple(r) for r in X)


def valuation_of_det(A, prec=None):
    return sum(smith_exponents(A, prec))


def is_integral(A):
    """All entries have certified valuation >= 0 (known zeros allowed when
    their precision is positive)."""
    for r in A:
        for a in r:
            if a.coeffs and a.val < 0:
                return False
            if not a.coeffs and a.prec != INF and a.prec < 0:
                raise InsufficientPrecision("entry known only beyond negative precision", a.prec)
    return True


def same_lattice(X, Y, prec=None):
    """Column spans of two square full-rank matrices coincide."""
    r = len(X)
    joint = tuple(tuple(X[i]) + tuple(Y[i]) for i in range(r))
    vx = sum(smith_exponents(X, prec))
    vy = sum(smith_exponents(Y, prec))
    vj = sum(smith_exponents(joint, prec)[:r])
    return vx == vy == vj

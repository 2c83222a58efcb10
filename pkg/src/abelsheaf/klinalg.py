"""Gaussian elimination over a finite field F_{p^e} on integer encodings."""
from __future__ import annotations


def rref(M, F):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    R = [list(r) for r in M]
    if not R:
        return R, []
    ncols = len(R[0])
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= len(R):
            break
        piv = next((i for i in range(row, len(R)) if R[i][col]), None)
        if piv is None:
            continue
        R[row], R[piv] = R[piv], R[row]
        inv = F.inv(R[row][col])
        R[row] = [F.mul(inv, x) if x else 0 for x in R[row]]
        prow = R[row]
        for i in range(len(R)):
            if i != row and R[i][col]:
                f = R[i][col]
                ri = R[i]
                R[i] = [F.sub(a, F.mul(f, b)) if b else a for a, b in zip(ri, prow)]
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M, F):
    return len(rref(M, F)[1])


def nullspace(M, F, ncols=None):
    """Basis of {x : M x = 0} as a list of vectors."""
    if not M:
        n = ncols or 0
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    n = len(M[0])
    R, pivots = rref(M, F)
    pivset = set(pivots)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [0] * n
        v[f] = 1
        for i, pc in enumerate(pivots):
            if R[i][f]:
                v[pc] = F.neg(R[i][f])
        basis.append(v)
    return basis


def solve(M, b, F):
    """One solution of M x = b, or None."""
    aug = [list(r) + [bi] for r, bi in zip(M, b)]
    n = len(M[0]) if M else 0
    R, pivots = rref(aug, F)
    if n in pivots:
        return None
    x = [0] * n
    for i, pc in enumerate(pivots):
        x[pc] = R[i][n]
    return x


def inverse(M, F):
    n = len(M)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(M)]
    R, pivots = rref(aug, F)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R[:n]]


def det(M, F):
    n = len(M)
    A = [list(r) for r in M]
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = F.neg(d)
        d = F.mul(d, A[c][c])
        inv = F.inv(A[c][c])
        for i in range(c + 1, n):
            if A[i][c]:
                f = F.mul(A[i][c], inv)
                A[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(A[i], A[c])]
    return d


def in_span(v, vectors, F):
    if not vectors:
        return not any(v)
    return rank(vectors + [list(v)], F) == rank(vectors, F)

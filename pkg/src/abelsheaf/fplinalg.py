"""Dense linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p).  Sizes here are
desk scale (a few thousand unknowns at most), so plain Gauss-Jordan
elimination with vectorised row updates is enough.
"""
from __future__ import annotations

import numpy as np


def _inv_table(p):
    inv = [0] * p
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    return np.array(inv, dtype=np.int64)


def rref(A, p):
    """Reduced row echelon form of ``A`` over F_p.

    Returns ``(R, pivots)`` where ``pivots`` lists the pivot column of each
    nonzero row of ``R``.
    """
    R = np.array(A, dtype=np.int64) % p
    if R.ndim != 2:
        raise ValueError("expected a 2-d array")
    nrows, ncols = R.shape
    inv = _inv_table(p)
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = (R[row] * inv[R[row, col]]) % p
        factors = R[:, col].copy()
        factors[row] = 0
        nzr = np.nonzero(factors)[0]
        if nzr.size:
            R[nzr] = (R[nzr] - np.outer(factors[nzr], R[row])) % p
        pivots.append(col)
        row += 1
    return R, pivots


def nullspace(A, p):
    """Basis of ``{x : A x = 0}`` as the rows of a (k, n) array."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(A, p)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-R[i, f]) % p
    return basis


def solve(A, b, p):
    """Solve ``A x = b`` over F_p.

    Returns ``(x0, kernel)`` with ``x0`` a particular solution (or ``None`` if
    the system is inconsistent) and ``kernel`` the rows spanning the
    homogeneous solutions.
    """
    A = np.asarray(A, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    m, n = A.shape
    aug = np.concatenate([A, b.reshape(m, 1)], axis=1)
    R, pivots = rref(aug, p)
    if n in pivots:
        return None, nullspace(A, p)
    x0 = np.zeros(n, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x0[pc] = R[i, n]
    free = [c for c in range(n) if c not in set(pivots)]
    kernel = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        kernel[k, f] = 1
        for i, pc in enumerate(pivots):
            kernel[k, pc] = (-R[i, f]) % p
    return x0, kernel


def rank(A, p):
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def in_span(v, basis, p):
    """True iff ``v`` lies in the row span of ``basis``."""
    v = np.asarray(v, dtype=np.int64).reshape(1, -1) % p
    basis = np.asarray(basis, dtype=np.int64).reshape(-1, v.shape[1])
    if basis.shape[0] == 0:
        return not v.any()
    return rank(np.concatenate([basis, v]), p) == rank(basis, p)

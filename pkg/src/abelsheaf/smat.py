"""sigma-twisted matrices and the reduction of semilinear equations to
linear algebra over the prime field.

Matrices are tuples of row tuples whose entries are ``TruncSeries`` or
``Poly`` values (anything with ``+``, ``-``, ``*``, ``sigma`` and
``is_zero``).  A ``SigmaMatrix`` A with twist s stands for the operator
A * sigma^s.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import fplinalg
from .errors import FieldMismatch
from .series import INF, Poly, TruncSeries

# ---------------------------------------------------------------------------
# plain matrices over a series or polynomial ring


def _zero_like(x):
    if isinstance(x, TruncSeries):
        return TruncSeries.zero(x.field)
    return Poly.zero(x.ring)


def _one_like(x):
    if isinstance(x, TruncSeries):
        return TruncSeries.one(x.field)
    return Poly.one(x.ring)


def _is_exact_zero(x):
    if isinstance(x, TruncSeries):
        return not x.coeffs and x.prec == INF
    return x.is_zero()


def as_matrix(rows):
    return tuple(tuple(r) for r in rows)


def shape(A):
    return len(A), (len(A[0]) if A else 0)


def identity(template, n):
    """n x n identity with entries of the same kind as ``template``."""
    z, o = _zero_like(template), _one_like(template)
    return tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))


def zeros(template, m, n):
    z = _zero_like(template)
    return tuple(tuple(z for _ in range(n)) for _ in range(m))


def series_identity(field, n, prec=INF):
    o, z = TruncSeries.one(field, prec), TruncSeries.zero(field, prec)
    return tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))


def mat_add(A, B):
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A, B):
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_neg(A):
    return tuple(tuple(-a for a in r) for r in A)


def mat_mul(A, B):
    m, n = shape(A)
    n2, k = shape(B)
    if n != n2:
        raise ValueError(f"shape mismatch {m}x{n} * {n2}x{k}")
    if m == 0 or k == 0:
        return tuple(tuple() for _ in range(m))
    z = _zero_like(A[0][0] if n else B[0][0])
    out = []
    for i in range(m):
        row = A[i]
        nz = [(j, row[j]) for j in range(n) if not _is_exact_zero(row[j])]
        out_row = []
        for c in range(k):
            acc = z
            for j, a in nz:
                b = B[j][c]
                if not _is_exact_zero(b):
                    acc = acc + a * b
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def mat_scale(A, c):
    return tuple(tuple(c * a for a in r) for r in A)


def mat_sigma(A, q, n=1):
    if n == 0:
        return A
    return tuple(tuple(a.sigma(q, n) for a in r) for r in A)


def mat_frob_abs(A, k):
    return tuple(tuple(a.frob_abs(k) for a in r) for r in A)


def mat_map(A, f):
    return tuple(tuple(f(a) for a in r) for r in A)


def transpose(A):
    return tuple(zip(*A)) if A else ()


def mat_truncate(A, N):
    return mat_map(A, lambda a: a.truncate(N))


def mat_precision(A):
    """Smallest entry precision of a series matrix."""
    return min((a.prec for r in A for a in r), default=INF)


def mat_valuation(A):
    """Smallest valuation over the entries (known-zero entries count as their
    lower bound)."""
    return min((a.val for r in A for a in r), default=INF)


def mat_shift(A, k):
    """Multiply a series matrix by z^k."""
    return mat_map(A, lambda a: a.shift(k))


def block_matrix(blocks):
    """Assemble a matrix from a grid of equally sized blocks."""
    rows = []
    for brow in blocks:
        h = len(brow[0])
        for i in range(h):
            rows.append(tuple(x for b in brow for x in b[i]))
    return tuple(rows)


def block_diag(*mats):
    template = next(m[0][0] for m in mats if m)
    z = _zero_like(template)
    n = sum(len(m) for m in mats)
    out = []
    off = 0
    for M in mats:
        for r in M:
            out.append(tuple([z] * off + list(r) + [z] * (n - off - len(r))))
        off += len(M)
    return tuple(out)


def submatrix(A, rows, cols):
    return tuple(tuple(A[i][j] for j in cols) for i in rows)


def mat_equal(A, B):
    """Entrywise agreement modulo the available precision."""
    if shape(A) != shape(B):
        return False
    for ra, rb in zip(A, B):
        for a, b in zip(ra, rb):
            if not (a - b).is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# determinants and characteristic polynomials (division free)


def _berkowitz(A):
    """Coefficients [c_0, ..., c_n] of det(X*I - A), c_n = 1."""
    n = len(A)
    z = _zero_like(A[0][0])
    o = _one_like(A[0][0])
    vect = [o, -A[0][0]]
    for r in range(1, n):
        R = [A[r][j] for j in range(r)]
        col = [A[i][r] for i in range(r)]
        Q = [o, -A[r][r]]
        cur = col
        for k in range(r):
            s = z
            for x, y in zip(R, cur):
                if not (_is_exact_zero(x) or _is_exact_zero(y)):
                    s = s + x * y
            Q.append(-s)
            if k < r - 1:
                nxt = []
                for i in range(r):
                    acc = z
                    for j in range(r):
                        a = A[i][j]
                        if not (_is_exact_zero(a) or _is_exact_zero(cur[j])):
                            acc = acc + a * cur[j]
                    nxt.append(acc)
                cur = nxt
        new = []
        for i in range(r + 2):
            acc = z
            for j in range(min(i, r) + 1):
                if i - j < len(Q) and j < len(vect):
                    qv = Q[i - j]
                    if not (_is_exact_zero(qv) or _is_exact_zero(vect[j])):
                        acc = acc + qv * vect[j]
            new.append(acc)
        vect = new
    return list(reversed(vect))


def _det_laplace(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if n == 3:
        a = A
        return (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
    raise ValueError("laplace expansion only for n <= 3")


def det(A):
    n = len(A)
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    if n <= 3:
        return _det_laplace(A)
    c0 = _berkowitz(A)[0]
    return -c0 if n % 2 else c0


def _components(A):
    """Strongly connected components of the nonzero pattern, in an order
    where the matrix is block triangular."""
    n = len(A)
    rows, cols = [], []
    for i in range(n):
        for j in range(n):
            if not A[i][j].is_zero():
                rows.append(i)
                cols.append(j)
    g = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    k, labels = connected_components(g, directed=True, connection="strong")
    comps = [[] for _ in range(k)]
    for i, lab in enumerate(labels):
        comps[lab].append(i)
    return comps


def _poly_mul_coeffs(a, b, zero):
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def charpoly(A):
    """Coefficients [c_0, ..., c_n] of det(X*I - A) with c_n = 1.

    The nonzero pattern is split into strongly connected components; the
    characteristic polynomial is the product over the diagonal blocks.  For
    series matrices the split is used only when every entry is integral,
    and the coefficients are then capped at the matrix precision so that
    dropped known-zero entries cannot overstate what is known.
    """
    template = A[0][0]
    series_mode = isinstance(template, TruncSeries)
    if series_mode and mat_valuation(A) < 0:
        return _berkowitz(A)
    comps = _components(A)
    if len(comps) == 1:
        return _berkowitz(A)
    z = _zero_like(template)
    result = [_one_like(template)]
    for comp in comps:
        block = submatrix(A, comp, comp)
        result = _poly_mul_coeffs(result, _berkowitz(block), z)
    if series_mode:
        N = mat_precision(A)
        result = [c.truncate(N) for c in result]
    return result


def minor_indices(n, j):
    return list(itertools.combinations(range(n), j))


def exterior_matrix(A, j):
    """Matrix of j x j minors, rows/columns indexed by j-subsets in lex order."""
    n = len(A)
    if not 1 <= j <= n:
        raise ValueError(f"exterior degree {j} out of range for size {n}")
    idx = minor_indices(n, j)
    if j == 1:
        return A
    return tuple(tuple(det(submatrix(A, I, J)) for J in idx) for I in idx)


# ---------------------------------------------------------------------------


class SigmaMatrix:
    """The operator A * sigma^twist with sigma the q-Frobenius."""

    __slots__ = ("A", "twist", "q")

    def __init__(self, A, twist=1, q=None):
        if twist < 0:
            raise ValueError("twist must be nonnegative")
        self.A = as_matrix(A)
        self.twist = twist
        self.q = q

    @property
    def field(self):
        e = self.A[0][0]
        return e.field

    @property
    def shape(self):
        return shape(self.A)

    @property
    def precision(self):
        if isinstance(self.A[0][0], TruncSeries):
            return mat_precision(self.A)
        return INF

    def truncate(self, N):
        return SigmaMatrix(mat_truncate(self.A, N), self.twist, self.q)

    def __eq__(self, other):
        return (isinstance(other, SigmaMatrix) and self.twist == other.twist
                and self.q == other.q and self.A == other.A)

    def __hash__(self):
        return hash((self.A, self.twist, self.q))

    def __repr__(self):
        rows = "; ".join(", ".join(repr(x) for x in r) for r in self.A)
        return f"SigmaMatrix([{rows}] * sigma^{self.twist})"


def compose(M1, M2):
    """(A1 sigma^s1) o (A2 sigma^s2) = A1 sigma^s1(A2) sigma^(s1+s2)."""
    if M1.q != M2.q:
        raise FieldMismatch("twists refer to different ground fields")
    if M1.shape[1] != M2.shape[0]:
        raise ValueError(f"shape mismatch {M1.shape} o {M2.shape}")
    A2 = mat_sigma(M2.A, M1.q, M1.twist) if M1.twist else M2.A
    return SigmaMatrix(mat_mul(M1.A, A2), M1.twist + M2.twist, M1.q)


def sigma_identity(template, n, q):
    return SigmaMatrix(identity(template, n), 0, q)


def power(M, n):
    """n-fold composite by repeated squaring."""
    r, c = M.shape
    if r != c:
        raise ValueError("power of a non-square matrix")
    if n < 0:
        raise ValueError("negative power")
    result = None
    base = M
    while n:
        if n & 1:
            result = base if result is None else compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    if result is None:
        return sigma_identity(M.A[0][0], r, M.q)
    return result


def exterior_power(M, j):
    return SigmaMatrix(exterior_matrix(M.A, j), M.twist, M.q)


def sigma_det(M):
    """det(A) as a 1x1 SigmaMatrix with the same twist."""
    return SigmaMatrix(((det(M.A),),), M.twist, M.q)


# ---------------------------------------------------------------------------
# semilinear systems over a finite field


class SemilinearSystem:
    """C X Cr - D sigma^s(X) Dr = R over a finite field.

    Matrices hold integer element encodings.  ``Cr`` and ``Dr`` default to
    identity matrices, giving the plain form C X - D sigma(X) = R.
    """

    def __init__(self, field, q, C, D, R, x_shape=None, Cr=None, Dr=None, s=1):
        self.field = field
        self.q = q
        self.s = s
        self.C = [list(r) for r in C]
        self.D = [list(r) for r in D]
        self.R = [list(r) for r in R]
        m1 = len(self.R)
        m2 = len(self.R[0]) if m1 else 0
        if x_shape is None:
            n1 = len(self.C[0]) if self.C and self.C[0] else len(self.D[0])
            n2 = m2 if Cr is None else len(Cr)
            x_shape = (n1, n2)
        self.x_shape = x_shape
        n1, n2 = x_shape
        self.Cr = [list(r) for r in Cr] if Cr is not None else _int_identity(n2)
        self.Dr = [list(r) for r in Dr] if Dr is not None else _int_identity(n2)
        if len(self.C) != m1 or len(self.D) != m1:
            raise ValueError("left factors must have as many rows as R")
        if any(len(r) != n1 for r in self.C + self.D):
            raise ValueError("left factors must have as many columns as X has rows")
        if len(self.Cr) != n2 or len(self.Dr) != n2:
            raise ValueError("right factors must have as many rows as X has columns")
        if any(len(r) != m2 for r in self.Cr + self.Dr):
            raise ValueError("right factors must have as many columns as R")

    def apply(self, X):
        """Evaluate the left-hand side at X."""
        F = self.field
        k = F.ground_degree(self.q) * self.s
        sX = [[F.frob(x, k) for x in r] for r in X]
        left = _imul(F, _imul(F, self.C, X), self.Cr)
        right = _imul(F, _imul(F, self.D, sX), self.Dr)
        return [[F.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(left, right)]


def _int_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _imul(F, A, B):
    m = len(A)
    n = len(B)
    k = len(B[0]) if n else 0
    out = [[0] * k for _ in range(m)]
    for i in range(m):
        for j in range(n):
            a = A[i][j]
            if a:
                Bj = B[j]
                oi = out[i]
                for c in range(k):
                    if Bj[c]:
                        oi[c] = F.add(oi[c], F.mul(a, Bj[c]))
    return out


def int_mat_mul(F, A, B):
    return _imul(F, A, B)


def mat_to_vec(F, X):
    return np.array([d for r in X for x in r for d in F.digits(x)], dtype=np.int64)


def vec_to_mat(F, v, shape_):
    n1, n2 = shape_
    e = F.e
    v = [int(t) for t in v]
    return [[F.from_digits(v[(i * n2 + j) * e:(i * n2 + j + 1) * e]) for j in range(n2)] for i in range(n1)]


def linearize_semilinear(sys):
    """The F_p-linear system (A, b) on the F_p-coordinates of X.

    Unknown (i, j, k) is the coefficient of x^k in X[i][j]; equation
    (i', j', k') is the coefficient of x^k' in entry (i', j').
    """
    F = sys.field
    e = F.e
    n1, n2 = sys.x_shape
    m1 = len(sys.R)
    m2 = len(sys.R[0]) if m1 else 0
    kf = F.ground_degree(sys.q) * sys.s
    A = np.zeros((m1 * m2 * e, n1 * n2 * e), dtype=np.int64)
    basis = [F.p ** k for k in range(e)]
    sbasis = [F.frob(b, kf) for b in basis]
    for i in range(n1):
        Ci = [sys.C[a][i] for a in range(m1)]
        Di = [sys.D[a][i] for a in range(m1)]
        for j in range(n2):
            Crj = sys.Cr[j]
            Drj = sys.Dr[j]
            for k in range(e):
                col = (i * n2 + j) * e + k
                b, sb = basis[k], sbasis[k]
                for a in range(m1):
                    cb = F.mul(Ci[a], b) if Ci[a] else 0
                    ds = F.mul(Di[a], sb) if Di[a] else 0
                    if not cb and not ds:
                        continue
                    for c in range(m2):
                        val = 0
                        if cb and Crj[c]:
                            val = F.mul(cb, Crj[c])
                        if ds and Drj[c]:
                            val = F.sub(val, F.mul(ds, Drj[c]))
                        if val:
                            row = (a * m2 + c) * e
                            A[row:row + e, col] = F.digits(val)
    b = mat_to_vec(F, sys.R)
    return A, b


class SemilinearSolution:
    """Affine F_p-space {particular + sum c_i kernel_i}."""

    def __init__(self, field, x_shape, particular, kernel):
        self.field = field
        self.x_shape = x_shape
        self.particular = particular
        self.kernel = kernel

    @property
    def is_empty(self):
        return self.particular is None

    @property
    def dimension(self):
        """F_p-dimension of the solution space (-1 if empty)."""
        return -1 if self.particular is None else len(self.kernel)

    def particular_matrix(self):
        if self.particular is None:
            return None
        return vec_to_mat(self.field, self.particular, self.x_shape)

    def kernel_matrices(self):
        return [vec_to_mat(self.field, v, self.x_shape) for v in self.kernel]

    def contains(self, X):
        if self.particular is None:
            return False
        F = self.field
        d = (mat_to_vec(F, X) - self.particular) % F.p
        return fplinalg.in_span(d, self.kernel, F.p)

    def elements(self):
        """Enumerate every solution (small spaces only)."""
        if self.particular is None:
            return
        p = self.field.p
        if not self.kernel:
            yield vec_to_mat(self.field, self.particular, self.x_shape)
            return
        K = np.asarray(self.kernel, dtype=np.int64).reshape(len(self.kernel), -1)
        for coeffs in itertools.product(range(p), repeat=len(self.kernel)):
            v = (self.particular + np.asarray(coeffs, dtype=np.int64) @ K) % p
            yield vec_to_mat(self.field, v, self.x_shape)


def solve_semilinear(sys):
    A, b = linearize_semilinear(sys)
    p = sys.field.p
    if A.shape[1] == 0:
        ok = not b.any()
        return SemilinearSolution(sys.field, sys.x_shape, np.zeros(0, dtype=np.int64) if ok else None, [])
    x0, kernel = fplinalg.solve(A, b, p)
    return SemilinearSolution(sys.field, sys.x_shape, x0, [row for row in kernel])


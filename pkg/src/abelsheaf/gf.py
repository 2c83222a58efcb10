"""Finite fields F_{p^e} with canonical moduli, Frobenius, embeddings and
Artin-Schreier solving.

Elements are encoded internally as integers ``c_0 + c_1 p + ... + c_{e-1} p^{e-1}``
where ``(c_0, ..., c_{e-1})`` is the little-endian coefficient tuple with
respect to the power basis of ``x`` modulo the field's modulus.  The integer
order on encodings is the lexicographic order on ``(c_{e-1}, ..., c_0)``;
this is the element order used everywhere (smallest roots, sorted outputs).

The heavy code paths (series and matrix kernels) work directly on these
integers through the field's ``add``/``mul``/... methods.  ``FqElement`` is
the user-facing wrapper with operator overloading.
"""
from __future__ import annotations

import random
import threading
from functools import reduce

import numpy as np

from . import fplinalg
from .errors import FieldMismatch

MAX_P = 7
MAX_E = 12
_TABLE_LIMIT = 1 << 17
_ADD_TABLE_LIMIT = 729

_registry = {}
_embeddings = {}
_lock = threading.RLock()


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# polynomials over F_p as little-endian int lists

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a, f, p):
    a = list(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(_trim(a)) - 1 >= df:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % p
    return a


def _fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


def _fp_gcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _fp_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(c * inv) % p for c in a]
    return a


def _fp_powmod_x(n, f, p):
    """x^n mod f over F_p."""
    result = [1]
    base = _fp_mod([0, 1], f, p)
    while n:
        if n & 1:
            result = _fp_mod(_fp_mul(result, base, p), f, p)
        base = _fp_mod(_fp_mul(base, base, p), f, p)
        n >>= 1
    return result


def is_irreducible_fp(f, p):
    """Ben-Or test: a monic f of degree e is irreducible over F_p iff it has
    no common factor with x^{p^i} - x for 1 <= i <= e/2.  Equivalent to trial
    division by every monic polynomial of degree <= e/2."""
    f = _trim(list(f))
    e = len(f) - 1
    if e <= 0:
        return False
    if e == 1:
        return True
    for i in range(1, e // 2 + 1):
        g = _fp_powmod_x(p ** i, f, p)
        g = g + [0] * max(0, 2 - len(g))
        g[1] = (g[1] - 1) % p
        if len(_fp_gcd(f, g, p)) > 1:
            return False
    return True


def canonical_modulus(p, e):
    """Lexicographically smallest monic irreducible of degree e over F_p under
    the order on (c_{e-1}, ..., c_0)."""
    for idx in range(p ** e):
        low = [(idx // p ** i) % p for i in range(e)]
        f = low + [1]
        if is_irreducible_fp(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


# ---------------------------------------------------------------------------

class FqField:
    """The finite field F_{p^e} = F_p[x]/(modulus)."""

    def __init__(self, p, e, modulus):
        self.p = p
        self.e = e
        self.modulus = tuple(modulus)
        self.order = p ** e
        self._pw = [p ** i for i in range(e + 1)]
        self._frob_tables = {}
        self._build_tables()

    def __repr__(self):
        return f"F_{self.p}^{self.e}" if self.e > 1 else f"F_{self.p}"

    @property
    def spec(self):
        return f"{self.p}^{self.e}"

    def __reduce__(self):
        return (make_field, (self.p, self.e))

    # -- tables ---------------------------------------------------------
    def _build_tables(self):
        p, Q = self.p, self.order
        self.exp = None
        self.log = None
        self._add = None
        self._neg = None
        if self.e == 1:
            return
        if Q <= _TABLE_LIMIT:
            g = self._find_primitive()
            exp = [0] * (2 * (Q - 1))
            log = [0] * Q
            cur = 1
            for i in range(Q - 1):
                exp[i] = cur
                log[cur] = i
                cur = self._slow_mul(cur, g)
            for i in range(Q - 1, 2 * (Q - 1)):
                exp[i] = exp[i - (Q - 1)]
            self.exp = exp
            self.log = log
        if p != 2 and Q <= _ADD_TABLE_LIMIT:
            digits = [self.digits(v) for v in range(Q)]
            pw = self._pw[: self.e]
            self._add = [
                [sum(((da[i] + db[i]) % p) * pw[i] for i in range(self.e)) for db in digits]
                for da in digits
            ]
            self._neg = [sum(((-d[i]) % p) * pw[i] for i in range(self.e)) for d in digits]

    def _find_primitive(self):
        Q = self.order
        factors = _prime_factors(Q - 1)
        for g in range(2, Q):
            if all(self._slow_pow(g, (Q - 1) // r) != 1 for r in factors):
                return g
        return 1 if Q == 2 else None

    # -- encodings ------------------------------------------------------
    def digits(self, v):
        p = self.p
        out = []
        for _ in range(self.e):
            out.append(v % p)
            v //= p
        return tuple(out)

    def from_digits(self, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) > self.e:
            coeffs = list(_fp_mod(coeffs, list(self.modulus), self.p))
        v = 0
        for i, c in enumerate(coeffs):
            v += (c % self.p) * self._pw[i]
        return v

    # -- raw integer arithmetic ------------------------------------------
    def _slow_mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        prod = _fp_mul(list(self.digits(a)), list(self.digits(b)), self.p)
        return self.from_digits(_fp_mod(prod, list(self.modulus), self.p))

    def _slow_pow(self, a, n):
        result = 1
        while n:
            if n & 1:
                result = self._slow_mul(result, a)
            a = self._slow_mul(a, a)
            n >>= 1
        return result

    def add(self, a, b):
        p = self.p
        if self.e == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        if self._add is not None:
            return self._add[a][b]
        da, db = self.digits(a), self.digits(b)
        return sum(((x + y) % p) * w for x, y, w in zip(da, db, self._pw))

    def neg(self, a):
        p = self.p
        if self.e == 1:
            return (-a) % p
        if p == 2:
            return a
        if self._neg is not None:
            return self._neg[a]
        return sum(((-x) % p) * w for x, w in zip(self.digits(a), self._pw))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.e == 1:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        if self.log is not None:
            return self.exp[self.log[a] + self.log[b]]
        return self._slow_mul(a, b)

    def scalar(self, c, a):
        """Multiply by the prime-field integer c."""
        c %= self.p
        if c == 0:
            return 0
        if c == 1:
            return a
        if self.e == 1:
            return (c * a) % self.p
        return self.from_digits([(c * d) % self.p for d in self.digits(a)])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self))
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        if self.log is not None:
            Q = self.order
            return self.exp[(Q - 1 - self.log[a]) % (Q - 1)]
        return self._slow_pow(a, self.order - 2)

    def pow(self, a, n):
        Q = self.order
        if a == 0:
            if n < 0:
                raise ZeroDivisionError("inverse of zero")
            return 1 if n == 0 else 0
        n %= Q - 1
        if self.e == 1:
            return pow(a, n, self.p)
        if self.log is not None:
            return self.exp[(self.log[a] * n) % (Q - 1)]
        return self._slow_pow(a, n)

    def frob(self, a, k=1):
        """a^{p^k} (absolute Frobenius iterated k times)."""
        k %= self.e
        if k == 0 or a <= 1:
            return a
        table = self.frob_table(k)
        if table is not None:
            return table[a]
        return self.pow(a, self.p ** k)

    def frob_table(self, k):
        """Lookup table for a -> a^{p^k}, or None for large fields."""
        k %= self.e
        if k == 0:
            return None
        if self.order > _TABLE_LIMIT:
            return None
        t = self._frob_tables.get(k)
        if t is None:
            n = self.p ** k
            t = [self.pow(a, n) for a in range(self.order)]
            self._frob_tables[k] = t
        return t

    def ground_degree(self, q):
        """g with q = p^g, checking that F_q is a subfield."""
        g = 0
        v = 1
        while v < q:
            v *= self.p
            g += 1
        if v != q or g == 0 or self.e % g != 0:
            raise FieldMismatch(f"F_{q} is not a subfield of {self!r}")
        return g

    def is_in_subfield(self, a, q):
        g = self.ground_degree(q)
        return self.frob(a, g) == a

    # -- element wrappers ------------------------------------------------
    def __call__(self, value):
        if isinstance(value, FqElement):
            if value.field is not self:
                raise FieldMismatch("element of another field")
            return value
        if isinstance(value, int):
            if self.e == 1:
                return FqElement(self, value % self.p)
            if not 0 <= value < self.order:
                raise ValueError("integer encoding out of range")
            return FqElement(self, value)
        return FqElement(self, self.from_digits(value))

    def const(self, c):
        """Image of the integer c under Z -> F_p -> this field."""
        return c % self.p

    @property
    def zero(self):
        return FqElement(self, 0)

    @property
    def one(self):
        return FqElement(self, 1)

    @property
    def gen(self):
        """Class of x (the root of the modulus)."""
        return FqElement(self, self.from_digits([0, 1]) if self.e > 1 else 0)

    def elements(self):
        return [FqElement(self, v) for v in range(self.order)]

    def random_element(self, rng=random):
        return FqElement(self, rng.randrange(self.order))

    def subfield_elements(self, q):
        """Integer encodings of F_q inside this field, sorted."""
        g = self.ground_degree(q)
        return [a for a in range(self.order) if self.frob(a, g) == a]

    def primitive_element(self):
        """Smallest generator of the multiplicative group (as an integer)."""
        if self.e == 1:
            factors = _prime_factors(self.p - 1)
            for g in range(1, self.p):
                if all(pow(g, (self.p - 1) // r, self.p) != 1 for r in factors):
                    return g
        if self.log is not None:
            return self.exp[1]
        return self._find_primitive()

    # -- F_p-linear structure ------------------------------------------
    def to_vector(self, a):
        return self.digits(a)

    def from_vector(self, vec):
        return sum((int(c) % self.p) * w for c, w in zip(vec, self._pw))


class FqElement:
    """An element of an FqField."""

    __slots__ = ("field", "v")

    def __init__(self, field, v):
        self.field = field
        self.v = v

    def _other(self, other):
        if isinstance(other, FqElement):
            if other.field is not self.field:
                raise FieldMismatch("elements of distinct fields; embed explicitly")
            return other.v
        if isinstance(other, int):
            return self.field.const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.add(self.v, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.sub(self.v, o))

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.sub(o, self.v))

    def __neg__(self):
        return FqElement(self.field, self.field.neg(self.v))

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.mul(self.v, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.mul(self.v, self.field.inv(o)))

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FqElement(self.field, self.field.mul(o, self.field.inv(self.v)))

    def __pow__(self, n):
        return FqElement(self.field, self.field.pow(self.v, n))

    def inverse(self):
        return FqElement(self.field, self.field.inv(self.v))

    def __eq__(self, other):
        if isinstance(other, FqElement):
            return self.field is other.field and self.v == other.v
        if isinstance(other, int):
            return self.v == self.field.const(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.e, self.v))

    def __lt__(self, other):
        return self.v < self._other(other)

    def __bool__(self):
        return self.v != 0

    @property
    def coeffs(self):
        return self.field.digits(self.v)

    def frobenius(self, n=1, q=None):
        return frobenius(self, n, q)

    def __repr__(self):
        if self.field.e == 1:
            return str(self.v)
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                terms.append(str(c) if i == 0 else (mon if c == 1 else f"{c}*{mon}"))
        return " + ".join(reversed(terms)) or "0"


def make_field(p, e=1):
    """The canonical field F_{p^e}; repeated calls return the same object."""
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"characteristic {p!r} is not prime")
    if p > MAX_P:
        raise ValueError(f"characteristic {p} exceeds the cap {MAX_P}")
    if not isinstance(e, int) or not 1 <= e <= MAX_E:
        raise ValueError(f"degree {e!r} out of range 1..{MAX_E}")
    key = (p, e)
    fld = _registry.get(key)
    if fld is not None:
        return fld
    with _lock:
        fld = _registry.get(key)
        if fld is None:
            fld = FqField(p, e, canonical_modulus(p, e))
            _registry[key] = fld
    return fld


def parse_field_spec(text):
    """'p^e' or 'p' -> (p, e)."""
    text = str(text).strip()
    if "^" in text:
        a, b = text.split("^", 1)
        return int(a), int(b)
    return int(text), 1


def field_from_spec(text):
    return make_field(*parse_field_spec(text))


def ground_size_from_spec(text):
    p, g = parse_field_spec(text)
    return p ** g


def frobenius(x, n=1, q=None):
    """x^{q^n} for the ground field F_q of x's field (default q = p)."""
    fld = x.field
    g = 1 if q is None else fld.ground_degree(q)
    return FqElement(fld, fld.frob(x.v, g * n))


# ---------------------------------------------------------------------------
# polynomials over a field (int encodings), used for root finding

def _k_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _k_mod(F, a, f):
    a = list(a)
    df = len(f) - 1
    inv_lead = F.inv(f[-1])
    while len(_k_trim(a)) - 1 >= df:
        c = F.mul(a[-1], inv_lead)
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            if fi:
                a[shift + i] = F.sub(a[shift + i], F.mul(c, fi))
    return a


def _k_mul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = F.add(out[i + j], F.mul(ai, bj))
    return _k_trim(out)


def _k_add(F, a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _k_trim([F.add(x, y) for x, y in zip(a, b)])


def _k_gcd(F, a, b):
    a, b = _k_trim(list(a)), _k_trim(list(b))
    while b:
        a, b = b, _k_mod(F, a, b)
    if a:
        inv = F.inv(a[-1])
        a = [F.mul(c, inv) for c in a]
    return a


def _k_powmod(F, a, n, f):
    result = [1]
    base = _k_mod(F, a, f)
    while n:
        if n & 1:
            result = _k_mod(F, _k_mul(F, result, base), f)
        base = _k_mod(F, _k_mul(F, base, base), f)
        n >>= 1
    return result


def _k_divexact(F, a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    inv_lead = F.inv(b[-1])
    for k in range(len(out) - 1, -1, -1):
        c = F.mul(a[k + len(b) - 1], inv_lead)
        out[k] = c
        if c:
            for i, bi in enumerate(b):
                a[k + i] = F.sub(a[k + i], F.mul(c, bi))
    return _k_trim(out)


def _one_root(F, f, rng):
    """A root in F of a squarefree, completely split polynomial f (over F)."""
    f = _k_trim(list(f))
    while len(f) > 2:
        c = rng.randrange(F.order)
        if F.p == 2:
            # trace map T(cx) = sum (cx)^{2^i}
            t = [0, c]
            acc = list(t)
            cur = list(t)
            for _ in range(F.e - 1):
                cur = _k_mod(F, _k_mul(F, cur, cur), f)
                acc = _k_add(F, acc, cur)
            h = _k_gcd(F, f, acc)
        else:
            w = _k_powmod(F, [c, 1], (F.order - 1) // 2, f)
            w = w + [0] * max(0, 1 - len(w))
            w[0] = F.sub(w[0], 1)
            h = _k_gcd(F, f, _k_trim(w))
        if 1 < len(h) < len(f):
            g = _k_divexact(F, f, h)
            f = h if len(h) <= len(g) else g
            inv = F.inv(f[-1])
            f = [F.mul(x, inv) for x in f]
    return F.neg(F.mul(f[0], F.inv(f[1])))


def _roots_of_modulus(source, target):
    """All roots (sorted integer encodings) in target of source's modulus."""
    F = target
    f = [F.const(c) for c in source.modulus]
    if F.order <= 1 << 16:
        roots = []
        for a in range(F.order):
            acc = 0
            for c in reversed(f):
                acc = F.add(F.mul(acc, a), c)
            if acc == 0:
                roots.append(a)
        return roots
    beta = _one_root(F, f, random.Random(0))
    roots = {beta}
    cur = beta
    for _ in range(source.e - 1):
        cur = F.frob(cur, 1)
        roots.add(cur)
    return sorted(roots)


class FieldEmbedding:
    """Ring homomorphism F_{p^a} -> F_{p^b} sending x to the smallest root of
    the source modulus in the target."""

    def __init__(self, source, target):
        if source.p != target.p or target.e % source.e != 0:
            raise FieldMismatch(f"no embedding {source!r} -> {target!r}")
        self.source = source
        self.target = target
        if source.e == 1:
            self.image = target.from_digits([0])
        else:
            self.image = _roots_of_modulus(source, target)[0]
        powers = [1]
        for _ in range(source.e - 1):
            powers.append(target.mul(powers[-1], self.image))
        self._powers = powers
        self._table = None
        if source.order <= 4096:
            self._table = [self._map(v) for v in range(source.order)]

    def _map(self, v):
        T = self.target
        acc = 0
        for c, w in zip(self.source.digits(v), self._powers):
            if c:
                acc = T.add(acc, T.scalar(c, w))
        return acc

    def map_int(self, v):
        if self._table is not None:
            return self._table[v]
        return self._map(v)

    def __call__(self, x):
        if isinstance(x, FqElement):
            if x.field is not self.source:
                raise FieldMismatch("element not in the embedding's source")
            return FqElement(self.target, self.map_int(x.v))
        return self.map_int(x)

    def preimage_int(self, w):
        """Inverse image of an integer encoding, or None if not in the image."""
        if self._table is not None:
            try:
                return self._table.index(w)
            except ValueError:
                return None
        for v in range(self.source.order):
            if self._map(v) == w:
                return v
        return None


def embed(source, target):
    """Cached canonical embedding."""
    if source is target:
        return _IdentityEmbedding(source)
    key = (source.p, source.e, target.e)
    emb = _embeddings.get(key)
    if emb is None:
        with _lock:
            emb = _embeddings.get(key)
            if emb is None:
                emb = FieldEmbedding(source, target)
                _embeddings[key] = emb
    return emb


class _IdentityEmbedding:
    def __init__(self, field):
        self.source = self.target = field

    def map_int(self, v):
        return v

    def preimage_int(self, w):
        return w

    def __call__(self, x):
        return x if isinstance(x, FqElement) else x


def common_extension(*fields):
    """Smallest canonical field containing all given fields."""
    p = fields[0].p
    if any(f.p != p for f in fields):
        raise FieldMismatch("different characteristics")
    e = reduce(lambda a, b: a * b // _gcd(a, b), [f.e for f in fields], 1)
    return make_field(p, e)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------

def lang_map_matrix(field, q):
    """Matrix over F_p of u -> u^q - u on the power basis (columns = images)."""
    g = field.ground_degree(q)
    e = field.e
    M = np.zeros((e, e), dtype=np.int64)
    for i in range(e):
        basis = field.from_digits([0] * i + [1])
        img = field.sub(field.frob(basis, g), basis)
        M[:, i] = field.digits(img)
    return M


def artin_schreier_solve(b, q):
    """All u with u^q - u + b = 0.

    Returns ``(solutions, extended)``: the sorted solutions in b's field, or,
    if there are none, the sorted solutions in the degree-p extension together
    with ``extended = True``.  The solution set is a coset of F_q.
    """
    fld = b.field
    fld.ground_degree(q)
    sols = _as_solutions(fld, q, fld.neg(b.v))
    if sols:
        return sols, False
    big = make_field(fld.p, fld.e * fld.p)
    emb = embed(fld, big)
    sols = _as_solutions(big, q, big.neg(emb.map_int(b.v)))
    return sols, True


def _as_solutions(fld, q, rhs):
    p = fld.p
    M = lang_map_matrix(fld, q)
    x0, kernel = fplinalg.solve(M, np.array(fld.digits(rhs)), p)
    if x0 is None:
        return []
    out = set()
    k = kernel.shape[0]
    for idx in range(p ** k):
        vec = x0.copy()
        c = idx
        for j in range(k):
            vec = vec + (c % p) * kernel[j]
            c //= p
        out.add(fld.from_vector(vec % p))
    return [FqElement(fld, v) for v in sorted(out)]

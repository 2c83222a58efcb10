"""Truncated Laurent series in z, polynomials in t, and the characteristic
value zeta.

A ``TruncSeries`` is known modulo z^N (its precision).  ``N`` may be
``math.inf``, meaning the series is exact (a Laurent polynomial).  A series
whose known coefficients all vanish is a known-zero; its valuation is
recorded as "at least N", stored as ``val == prec``.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.signal import convolve2d

from .errors import FieldMismatch, InsufficientPrecision
from .gf import FqElement

INF = math.inf
NEG_INF = -math.inf

_NUMPY_THRESHOLD = 600


# ---------------------------------------------------------------------------
# convolution kernel on integer encodings

def _digit_array(F):
    arr = getattr(F, "_digit_array", None)
    if arr is None:
        arr = np.array([F.digits(v) for v in range(F.order)], dtype=np.int64)
        F._digit_array = arr
        F._pw_array = np.array([F.p ** i for i in range(F.e)], dtype=np.int64)
    return arr


def conv(F, a, b, maxlen):
    """First ``maxlen`` coefficients of the product of coefficient lists."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0 or maxlen <= 0:
        return []
    n = min(la + lb - 1, maxlen)
    if la > n:
        a = a[:n]
        la = n
    if lb > n:
        b = b[:n]
        lb = n
    p = F.p
    if la * lb > _NUMPY_THRESHOLD and F.order <= (1 << 17):
        return _conv_numpy(F, a, b, n)
    if F.e == 1:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                lim = min(lb, n - i)
                for j in range(lim):
                    y = b[j]
                    if y:
                        out[i + j] += x * y
        return [c % p for c in out]
    if F.log is None:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j in range(min(lb, n - i)):
                    if b[j]:
                        out[i + j] = F.add(out[i + j], F.mul(x, b[j]))
        return out
    log, exp = F.log, F.exp
    lb_log = [log[y] if y else -1 for y in b]
    out = [0] * n
    if p == 2:
        for i, x in enumerate(a):
            if x:
                lx = log[x]
                for j in range(min(lb, n - i)):
                    ly = lb_log[j]
                    if ly >= 0:
                        out[i + j] ^= exp[lx + ly]
        return out
    addt = F._add
    if addt is None:
        for i, x in enumerate(a):
            if x:
                lx = log[x]
                for j in range(min(lb, n - i)):
                    ly = lb_log[j]
                    if ly >= 0:
                        out[i + j] = F.add(out[i + j], exp[lx + ly])
        return out
    for i, x in enumerate(a):
        if x:
            lx = log[x]
            for j in range(min(lb, n - i)):
                ly = lb_log[j]
                if ly >= 0:
                    out[i + j] = addt[out[i + j]][exp[lx + ly]]
    return out


def _conv_numpy(F, a, b, n):
    p = F.p
    if F.e == 1:
        c = np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))[:n]
        return (c % p).tolist()
    D = _digit_array(F)
    A = D[np.asarray(a, dtype=np.int64)]
    B = D[np.asarray(b, dtype=np.int64)]
    C = convolve2d(A, B)[:n] % p
    e = F.e
    mod = F.modulus
    for s in range(C.shape[1] - 1, e - 1, -1):
        col = C[:, s]
        if col.any():
            for i in range(e):
                if mod[i]:
                    C[:, s - e + i] -= mod[i] * col
            C[:, s - e: s] %= p
    C = C[:, :e] % p
    return (C @ F._pw_array).tolist()


def _inverse_coeffs(F, u, n):
    """First n coefficients of 1/u for a unit coefficient list u."""
    w0 = F.inv(u[0])
    if n <= 64:
        w = [w0]
        neg_w0 = F.neg(w0)
        for k in range(1, n):
            acc = 0
            for j in range(1, min(k, len(u) - 1) + 1):
                if u[j] and w[k - j]:
                    acc = F.add(acc, F.mul(u[j], w[k - j]))
            w.append(F.mul(neg_w0, acc) if acc else 0)
        return w
    # Newton iteration w <- w (2 - u w)
    w = [w0]
    cur = 1
    two = F.const(2)
    while cur < n:
        cur = min(2 * cur, n)
        uw = conv(F, u, w, cur)
        t = [F.neg(c) for c in uw]
        t[0] = F.add(t[0], two)
        w = conv(F, w, t, cur)
    return w[:n]


def _frob_list(F, coeffs, k):
    k %= F.e
    if k == 0:
        return list(coeffs)
    table = F.frob_table(k)
    if table is not None:
        return [table[c] for c in coeffs]
    return [F.frob(c, k) for c in coeffs]


def _as_int(field, c):
    if isinstance(c, FqElement):
        if c.field is not field:
            raise FieldMismatch("coefficient from another field")
        return c.v
    if isinstance(c, int):
        # nonnegative ints are element encodings; negative ones prime-field constants
        if 0 <= c < field.order:
            return c
        if c < 0:
            return field.const(c)
        raise ValueError(f"{c} is not an element encoding of {field!r}")
    return field.from_digits(c)


# ---------------------------------------------------------------------------

class TruncSeries:
    """A Laurent series sum_{i} c_i z^{val+i} known modulo z^prec."""

    __slots__ = ("field", "val", "coeffs", "prec")

    def __init__(self, field, val, coeffs, prec=INF, _normalized=False):
        self.field = field
        if _normalized:
            self.val = val
            self.coeffs = coeffs
            self.prec = prec
            return
        cs = [_as_int(field, c) for c in coeffs]
        k = 0
        while k < len(cs) and cs[k] == 0:
            k += 1
        cs = cs[k:]
        val = val + k
        if prec != INF:
            keep = max(0, prec - val)
            cs = cs[:keep]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            val = prec
        self.val = val
        self.coeffs = tuple(cs)
        self.prec = prec

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, field, val, coeffs, prec):
        """Build from an int list that may have leading/trailing zeros."""
        cs = coeffs
        k = 0
        n = len(cs)
        while k < n and cs[k] == 0:
            k += 1
        val = val + k
        end = n
        if prec != INF:
            end = min(end, k + max(0, prec - val))
        while end > k and cs[end - 1] == 0:
            end -= 1
        if end <= k:
            return cls(field, prec, (), prec, _normalized=True)
        return cls(field, val, tuple(cs[k:end]), prec, _normalized=True)

    @classmethod
    def zero(cls, field, prec=INF):
        return cls(field, prec, (), prec, _normalized=True)

    @classmethod
    def one(cls, field, prec=INF):
        return cls.monomial(field, 1, 0, prec)

    @classmethod
    def monomial(cls, field, c, k, prec=INF):
        c = _as_int(field, c)
        if c == 0 or k >= prec:
            return cls.zero(field, prec)
        return cls(field, k, (c,), prec, _normalized=True)

    @classmethod
    def from_poly(cls, poly, prec=INF):
        """Polynomial in t read as a power series in the same variable."""
        return cls._raw(poly.field, 0, list(poly.coeffs), prec)

    # -- predicates -------------------------------------------------------
    def is_zero(self):
        """True if every known coefficient vanishes."""
        return not self.coeffs

    def is_exact(self):
        return self.prec == INF

    def valuation(self):
        """The certified valuation; raises for an unknown zero."""
        if self.coeffs:
            return self.val
        if self.prec == INF:
            return INF
        raise InsufficientPrecision("valuation is only known to be >= %s" % self.prec, self.prec)

    def val_lower_bound(self):
        return self.val

    def degree(self):
        """Exponent of the last known nonzero term."""
        if not self.coeffs:
            return NEG_INF
        return self.val + len(self.coeffs) - 1

    def coeff(self, k):
        if k >= self.prec:
            raise InsufficientPrecision(f"coefficient of z^{k} beyond precision", self.prec)
        i = k - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    def coeff_list(self, start, stop):
        """Integer coefficients of z^start .. z^(stop-1)."""
        out = [0] * max(0, stop - start)
        if not self.coeffs:
            return out
        lo = max(start, self.val)
        hi = min(stop, self.val + len(self.coeffs))
        for k in range(lo, hi):
            out[k - start] = self.coeffs[k - self.val]
        return out

    def leading(self):
        if not self.coeffs:
            raise InsufficientPrecision("leading coefficient of a known-zero series", self.prec)
        return self.coeffs[0]

    # -- arithmetic -------------------------------------------------------
    def _check(self, other):
        if other.field is not self.field:
            raise FieldMismatch("series over different fields")

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            self._check(other)
            return other
        if isinstance(other, (int, FqElement)):
            return TruncSeries.monomial(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.field
        prec = min(self.prec, other.prec)
        if not other.coeffs:
            if not self.coeffs:
                return TruncSeries.zero(F, prec)
            return self.truncate(prec)
        if not self.coeffs:
            return other.truncate(prec)
        lo = min(self.val, other.val)
        hi = max(self.val + len(self.coeffs), other.val + len(other.coeffs))
        if prec != INF:
            hi = min(hi, prec)
        if hi <= lo:
            return TruncSeries.zero(F, prec)
        out = self.coeff_list(lo, hi)
        b = other.coeffs
        off = other.val - lo
        add = F.add
        if F.p == 2 and F.e > 1:
            for i in range(len(b)):
                j = off + i
                if j >= hi - lo:
                    break
                out[j] ^= b[i]
        else:
            for i in range(len(b)):
                j = off + i
                if j >= hi - lo:
                    break
                out[j] = add(out[j], b[i])
        return TruncSeries._raw(F, lo, out, prec)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        if F.p == 2:
            return self
        return TruncSeries(F, self.val, tuple(F.neg(c) for c in self.coeffs), self.prec, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, FqElement)):
            return self.scale(_as_int(self.field, other))
        if not isinstance(other, TruncSeries):
            return NotImplemented
        self._check(other)
        F = self.field
        v1, v2 = self.val, other.val
        prec = min(v1 + other.prec, v2 + self.prec)
        if not self.coeffs or not other.coeffs:
            return TruncSeries.zero(F, prec)
        v = v1 + v2
        maxlen = len(self.coeffs) + len(other.coeffs) - 1
        if prec != INF:
            maxlen = min(maxlen, prec - v)
        out = conv(F, self.coeffs, other.coeffs, maxlen)
        return TruncSeries._raw(F, v, out, prec)

    __rmul__ = __mul__

    def scale(self, c):
        """Multiply by a field element given as an integer encoding."""
        F = self.field
        if c == 0:
            return TruncSeries.zero(F, self.prec)
        if c == 1:
            return self
        return TruncSeries(F, self.val, tuple(F.mul(c, x) for x in self.coeffs), self.prec, _normalized=True)

    def shift(self, k):
        """Multiply by z^k."""
        if not self.coeffs:
            return TruncSeries.zero(self.field, self.prec + k)
        return TruncSeries(self.field, self.val + k, self.coeffs, self.prec + k, _normalized=True)

    def truncate(self, prec):
        """Forget everything from z^prec on."""
        if prec >= self.prec:
            return self
        return TruncSeries._raw(self.field, self.val, list(self.coeffs), prec)

    def invert(self, prec=None):
        """Multiplicative inverse.

        The precision is propagated (N - 2v for input z^v * unit known mod
        z^N).  Exact non-monomial input needs an explicit target ``prec``.
        """
        if not self.coeffs:
            raise InsufficientPrecision("cannot invert a known-zero series", self.prec)
        F = self.field
        v = self.val
        if self.prec == INF:
            if len(self.coeffs) == 1:
                return TruncSeries(F, -v, (F.inv(self.coeffs[0]),), INF, _normalized=True)
            if prec is None:
                raise InsufficientPrecision("inverse of an exact series needs a target precision")
            out_prec = prec
        else:
            out_prec = self.prec - 2 * v
            if prec is not None:
                out_prec = min(out_prec, prec)
        n = out_prec - (-v)
        if n <= 0:
            return TruncSeries.zero(F, out_prec)
        w = _inverse_coeffs(F, list(self.coeffs), n)
        return TruncSeries._raw(F, -v, w, out_prec)

    def __truediv__(self, other):
        if isinstance(other, (int, FqElement)):
            return self.scale(self.field.inv(_as_int(self.field, other)))
        return self * other.invert()

    def sigma(self, q, n=1):
        """Apply x -> x^{q^n} to every coefficient (z is fixed)."""
        F = self.field
        k = F.ground_degree(q) * n
        return self.frob_abs(k)

    def frob_abs(self, k):
        """Apply the absolute Frobenius x -> x^{p^k} coefficientwise."""
        F = self.field
        if k % F.e == 0 or not self.coeffs:
            return self
        return TruncSeries(F, self.val, tuple(_frob_list(F, self.coeffs, k)), self.prec, _normalized=True)

    def map_field(self, emb):
        """Push coefficients through a field embedding."""
        return TruncSeries(emb.target, self.val, tuple(emb.map_int(c) for c in self.coeffs),
                           self.prec, _normalized=True)

    # -- comparisons ------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.field is other.field and self.val == other.val
                and self.coeffs == other.coeffs and self.prec == other.prec)

    def __hash__(self):
        return hash((self.val, self.coeffs, self.prec))

    def agrees_with(self, other):
        """Equal modulo the smaller precision."""
        d = self - other
        return d.is_zero()

    def __repr__(self):
        F = self.field
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                k = self.val + i
                cs = repr(FqElement(F, c))
                if F.e > 1 and "+" in cs:
                    cs = f"({cs})"
                mon = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
                terms.append(cs if not mon else (mon if c == 1 else f"{cs}*{mon}"))
        body = " + ".join(terms)
        if self.prec != INF:
            return f"{body} + O(z^{self.prec})" if body else f"O(z^{self.prec})"
        return body or "0"


def series(field, coeffs, val=0, prec=INF):
    """Convenience constructor from a list of coefficients."""
    return TruncSeries(field, val, coeffs, prec)


def series_arith(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def invert(a, prec=None):
    return a.invert(prec)


def sigma_series(a, q, n=1):
    return a.sigma(q, n)


# ---------------------------------------------------------------------------
# coefficient rings for polynomials: the field itself, or K[zeta]/zeta^M

class ZetaRing:
    """K[zeta]/(zeta^M); elements are tuples of M integer encodings."""

    def __init__(self, field, M):
        if M < 1:
            raise ValueError("M must be positive")
        self.field = field
        self.M = M
        self.p = field.p
        self.zero = (0,) * M
        self.one = (1,) + (0,) * (M - 1)

    def __eq__(self, other):
        return isinstance(other, ZetaRing) and other.field is self.field and other.M == self.M

    def __hash__(self):
        return hash((self.field.p, self.field.e, self.M))

    def __repr__(self):
        return f"{self.field!r}[zeta]/zeta^{self.M}"

    def coerce(self, c):
        if isinstance(c, tuple) and len(c) == self.M:
            return c
        if isinstance(c, CharValue):
            return c.coeffs
        return (_as_int(self.field, c),) + (0,) * (self.M - 1)

    def add(self, a, b):
        F = self.field
        return tuple(F.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        F = self.field
        return tuple(F.neg(x) for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        F = self.field
        out = [0] * self.M
        for i, x in enumerate(a):
            if x:
                for j in range(self.M - i):
                    if b[j]:
                        out[i + j] = F.add(out[i + j], F.mul(x, b[j]))
        return tuple(out)

    def scalar(self, c, a):
        return tuple(self.field.scalar(c, x) for x in a)

    def const(self, c):
        return (self.field.const(c),) + (0,) * (self.M - 1)

    def is_zero(self, a):
        return not any(a)

    def frob(self, a, k):
        """sigma acts on zeta too: zeta -> zeta^{p^k}."""
        F = self.field
        step = F.p ** k
        out = [0] * self.M
        for i, x in enumerate(a):
            if x and i * step < self.M:
                out[i * step] = F.add(out[i * step], F.frob(x, k))
        return tuple(out)

    def inv(self, a):
        F = self.field
        if a[0] == 0:
            raise ZeroDivisionError("not a unit")
        w = _inverse_coeffs(F, list(a), self.M)
        return tuple(w)


class _FieldRing:
    """Adapter presenting an FqField with the ring interface used by Poly."""

    def __init__(self, field):
        self.field = field
        self.p = field.p
        self.zero = 0
        self.one = 1

    def __eq__(self, other):
        return isinstance(other, _FieldRing) and other.field is self.field

    def __hash__(self):
        return hash((self.field.p, self.field.e))

    def __repr__(self):
        return repr(self.field)

    def coerce(self, c):
        return _as_int(self.field, c)

    def add(self, a, b):
        return self.field.add(a, b)

    def neg(self, a):
        return self.field.neg(a)

    def sub(self, a, b):
        return self.field.sub(a, b)

    def mul(self, a, b):
        return self.field.mul(a, b)

    def scalar(self, c, a):
        return self.field.scalar(c, a)

    def const(self, c):
        return self.field.const(c)

    def is_zero(self, a):
        return a == 0

    def frob(self, a, k):
        return self.field.frob(a, k)

    def inv(self, a):
        return self.field.inv(a)


_field_rings = {}


def coefficient_ring(field_or_ring):
    if isinstance(field_or_ring, (ZetaRing, _FieldRing)):
        return field_or_ring
    key = id(field_or_ring)
    r = _field_rings.get(key)
    if r is None:
        r = _FieldRing(field_or_ring)
        _field_rings[key] = r
    return r


class CharValue:
    """The characteristic zeta as an element of K[zeta]/zeta^M.

    With M = 1 this is simply a fixed element of K.  With M >= 2 the value
    zeta itself (coefficients (0, 1, 0, ...)) is the generic nilpotent point.
    """

    __slots__ = ("field", "M", "coeffs")

    def __init__(self, field, coeffs=(0,), M=None):
        if isinstance(coeffs, (int, FqElement)):
            coeffs = (coeffs,)
        coeffs = [_as_int(field, c) for c in coeffs]
        M = len(coeffs) if M is None else M
        coeffs = (coeffs + [0] * M)[:M]
        self.field = field
        self.M = M
        self.coeffs = tuple(coeffs)

    @classmethod
    def zero(cls, field):
        return cls(field, (0,))

    @classmethod
    def generic(cls, field, M=2):
        """zeta free with zeta^M = 0."""
        return cls(field, (0, 1), M)

    @property
    def value(self):
        if self.M != 1:
            raise ValueError("zeta is not a field element when M > 1")
        return self.coeffs[0]

    def is_zero(self):
        return not any(self.coeffs)

    def ring(self):
        return coefficient_ring(self.field) if self.M == 1 else ZetaRing(self.field, self.M)

    def ring_element(self):
        return self.coeffs[0] if self.M == 1 else self.coeffs

    def map_field(self, emb):
        return CharValue(emb.target, tuple(emb.map_int(c) for c in self.coeffs), self.M)

    def __eq__(self, other):
        return (isinstance(other, CharValue) and self.field is other.field
                and self.M == other.M and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.M, self.coeffs))

    def __repr__(self):
        if self.M == 1:
            return f"zeta={FqElement(self.field, self.coeffs[0])!r}"
        return f"zeta in K[zeta]/zeta^{self.M}: {self.coeffs}"


# ---------------------------------------------------------------------------

class Poly:
    """Polynomial in t over a field or over K[zeta]/zeta^M."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs=()):
        ring = coefficient_ring(ring)
        cs = [ring.coerce(c) for c in coeffs]
        while cs and ring.is_zero(cs[-1]):
            cs.pop()
        self.ring = ring
        self.coeffs = tuple(cs)

    @classmethod
    def _raw(cls, ring, cs):
        while cs and ring.is_zero(cs[-1]):
            cs.pop()
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.coeffs = tuple(cs)
        return obj

    @property
    def field(self):
        return self.ring.field

    @classmethod
    def zero(cls, ring):
        return cls(ring, ())

    @classmethod
    def one(cls, ring):
        ring = coefficient_ring(ring)
        return cls._raw(ring, [ring.one])

    @classmethod
    def t(cls, ring):
        ring = coefficient_ring(ring)
        return cls._raw(ring, [ring.zero, ring.one])

    @classmethod
    def constant(cls, ring, c):
        ring = coefficient_ring(ring)
        return cls(ring, [c])

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self):
        return not self.coeffs

    def __getitem__(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise FieldMismatch("polynomials over different rings")
            return other
        if isinstance(other, (int, FqElement, tuple, CharValue)):
            return Poly(self.ring, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        R = self.ring
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = [R.add(a[i] if i < len(a) else R.zero, b[i] if i < len(b) else R.zero) for i in range(n)]
        return Poly._raw(R, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.ring, [self.ring.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        R = self.ring
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(R, [])
        if isinstance(R, _FieldRing):
            return Poly._raw(R, conv(R.field, a, b, len(a) + len(b) - 1))
        out = [R.zero] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if not R.is_zero(x):
                for j, y in enumerate(b):
                    if not R.is_zero(y):
                        out[i + j] = R.add(out[i + j], R.mul(x, y))
        return Poly._raw(R, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        result = Poly.one(self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c):
        R = self.ring
        c = R.coerce(c)
        return Poly._raw(R, [R.mul(c, x) for x in self.coeffs])

    def shift(self, k):
        """Multiply by t^k (k >= 0)."""
        if not self.coeffs:
            return self
        return Poly._raw(self.ring, [self.ring.zero] * k + list(self.coeffs))

    def sigma(self, q, n=1):
        R = self.ring
        k = R.field.ground_degree(q) * n
        if k % R.field.e == 0 and isinstance(R, _FieldRing):
            return self
        if isinstance(R, _FieldRing):
            return Poly._raw(R, _frob_list(R.field, self.coeffs, k))
        return Poly._raw(R, [R.frob(c, k) for c in self.coeffs])

    def frob_abs(self, k):
        R = self.ring
        if isinstance(R, _FieldRing):
            return Poly._raw(R, _frob_list(R.field, self.coeffs, k))
        return Poly._raw(R, [R.frob(c, k) for c in self.coeffs])

    def map_field(self, emb):
        if not isinstance(self.ring, _FieldRing):
            raise FieldMismatch("embedding of zeta-ring polynomials is not supported")
        return Poly._raw(coefficient_ring(emb.target), [emb.map_int(c) for c in self.coeffs])

    def evaluate(self, x):
        R = self.ring
        x = R.coerce(x)
        acc = R.zero
        for c in reversed(self.coeffs):
            acc = R.add(R.mul(acc, x), c)
        return acc

    def taylor_shift(self, c):
        """The polynomial p(t + c)."""
        R = self.ring
        c = R.coerce(c)
        out = []
        for a in reversed(self.coeffs):
            # out <- out * (t + c) + a
            new = [R.zero] * (len(out) + 1)
            for i, x in enumerate(out):
                new[i + 1] = R.add(new[i + 1], x)
                new[i] = R.add(new[i], R.mul(x, c))
            new[0] = R.add(new[0], a)
            out = new
        return Poly._raw(R, out)

    def divmod(self, other):
        """Euclidean division (field coefficients, or unit leading coefficient)."""
        R = self.ring
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        a = list(self.coeffs)
        b = other.coeffs
        inv_lead = R.inv(b[-1])
        q = [R.zero] * max(0, len(a) - len(b) + 1)
        for k in range(len(a) - len(b), -1, -1):
            c = R.mul(a[k + len(b) - 1], inv_lead)
            q[k] = c
            if not R.is_zero(c):
                for i, bi in enumerate(b):
                    a[k + i] = R.sub(a[k + i], R.mul(c, bi))
        return Poly._raw(R, q), Poly._raw(R, a[: len(b) - 1])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def monic(self):
        R = self.ring
        return self.scale(R.inv(self.coeffs[-1]))

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.coeffs == other.coeffs
        if isinstance(other, (int, FqElement)):
            return self == Poly(self.ring, [other])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        R = self.ring
        terms = []
        for i, c in enumerate(self.coeffs):
            if R.is_zero(c):
                continue
            if isinstance(R, _FieldRing):
                cs = repr(FqElement(R.field, c))
                if R.field.e > 1 and "+" in cs:
                    cs = f"({cs})"
            else:
                cs = repr(c)
            mon = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            terms.append(cs if not mon else (mon if c == R.one else f"{cs}*{mon}"))
        return " + ".join(terms) or "0"


def poly(field, coeffs):
    return Poly(field, coeffs)


def substitute_t_inverse(a, prec=INF):
    """a(1/z) as a Laurent series with valuation -deg(a)."""
    if not isinstance(a.ring, _FieldRing):
        raise FieldMismatch("t -> 1/z substitution needs field coefficients")
    F = a.field
    if a.is_zero():
        return TruncSeries.zero(F, prec)
    d = a.degree()
    return TruncSeries._raw(F, -d, list(reversed(a.coeffs)), prec)


def laurent_to_poly(s, field=None):
    """Inverse of substitute_t_inverse for exact series with no positive
    powers of z."""
    if not s.is_exact():
        raise InsufficientPrecision("expected an exact series")
    F = s.field
    if s.is_zero():
        return Poly(F, [])
    if s.degree() > 0:
        raise ValueError("series has positive powers of z")
    d = -s.val
    cs = [0] * (d + 1)
    for i, c in enumerate(s.coeffs):
        cs[d - i] = c
    return Poly(F, cs)


def frac(x):
    return Fraction(x)

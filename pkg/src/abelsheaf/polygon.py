"""Newton and Hodge polygons with exact rational slopes."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class AtLeast:
    """A valuation known only to be at least ``bound``."""

    bound: int


class ConvexPolygon:
    """Lower convex polygon through integer x break points.

    ``breaks`` starts at x = 0 and lists only the points where the slope
    changes (plus both endpoints).
    """

    __slots__ = ("breaks", "certified")

    def __init__(self, breaks, certified=True):
        pts = [(int(x), Fraction(y)) for x, y in breaks]
        if not pts or pts[0][0] != 0:
            raise ValueError("polygon must start at x = 0")
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise ValueError("break points must have increasing x")
        self.breaks = tuple(_drop_collinear(pts))
        s = self._segment_slopes()
        if any(b < a for a, b in zip(s, s[1:])):
            raise ValueError("slopes must be non-decreasing")
        self.certified = bool(certified)

    @classmethod
    def from_slopes(cls, slopes, certified=True, start=0):
        """Polygon with the given slopes, one per unit of width."""
        pts = [(0, Fraction(start))]
        y = Fraction(start)
        for i, s in enumerate(sorted(Fraction(s) for s in slopes)):
            y += s
            pts.append((i + 1, y))
        return cls(pts, certified)

    def _segment_slopes(self):
        return [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(self.breaks, self.breaks[1:])]

    @property
    def width(self):
        return self.breaks[-1][0]

    @property
    def height(self):
        return self.breaks[-1][1]

    def slopes(self):
        """Slopes with multiplicity, one entry per unit of width, ascending."""
        out = []
        for (x0, y0), (x1, y1) in zip(self.breaks, self.breaks[1:]):
            s = (y1 - y0) / (x1 - x0)
            out.extend([s] * (x1 - x0))
        return out

    def slope_lengths(self):
        """(slope, x-length) per segment."""
        return [((y1 - y0) / (x1 - x0), x1 - x0)
                for (x0, y0), (x1, y1) in zip(self.breaks, self.breaks[1:])]

    def __call__(self, x):
        x = Fraction(x)
        if x < 0 or x > self.width:
            raise ValueError("x outside the polygon")
        for (x0, y0), (x1, y1) in zip(self.breaks, self.breaks[1:]):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return self.breaks[0][1]

    def scale_y(self, factor):
        factor = Fraction(factor)
        return ConvexPolygon([(x, y * factor) for x, y in self.breaks], self.certified)

    def with_certified(self, flag):
        return ConvexPolygon(self.breaks, flag)

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and self.breaks == other.breaks

    def __hash__(self):
        return hash(self.breaks)

    def __repr__(self):
        pts = ", ".join(f"({x}, {y})" for x, y in self.breaks)
        tag = "" if self.certified else " uncertified"
        return f"ConvexPolygon[{pts}]{tag}"

    def to_json(self):
        return {"breaks": [[x, y.numerator, y.denominator] for x, y in self.breaks],
                "certified": self.certified}

    @classmethod
    def from_json(cls, doc):
        return cls([(x, Fraction(n, d)) for x, n, d in doc["breaks"]], doc["certified"])


def _drop_collinear(pts):
    out = list(pts[:1])
    for pt in pts[1:]:
        while len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            if (y1 - y0) * (pt[0] - x1) == (pt[1] - y1) * (x1 - x0):
                out.pop()
            else:
                break
        out.append(pt)
    return out


def _lower_hull(pts):
    """Lower convex hull of points sorted by x (Andrew's monotone chain)."""
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the segment hull[-2] -> p
            if (y1 - y0) * (p[0] - x0) >= (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _hull_value(hull, x):
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        if x0 <= x <= x1:
            return y0 + Fraction(y1 - y0) * (x - x0) / (x1 - x0)
    if len(hull) == 1 and hull[0][0] == x:
        return hull[0][1]
    return None


def hull_from_valuations(points, r):
    """Newton polygon of a monic degree-r polynomial from coefficient valuations.

    ``points`` holds (i, v) with v the valuation of the coefficient of X^i:
    an int, an ``AtLeast`` marker, or ``None`` for an exactly zero
    coefficient.  The polygon uses x = r - i, so its slopes are the
    valuations of the roots in ascending order.  The result is uncertified
    when replacing some marker by infinity could change the hull.
    """
    exact, markers = [], []
    for i, v in points:
        if not 0 <= i <= r:
            raise ValueError(f"coefficient index {i} outside 0..{r}")
        if v is None:
            continue
        x = r - i
        if isinstance(v, AtLeast):
            markers.append((x, v.bound))
        else:
            exact.append((x, Fraction(v)))
    xs = {x for x, _ in exact} | {x for x, _ in markers}
    if 0 not in xs or r not in xs:
        raise ValueError("both end coefficients are required")
    all_pts = sorted(exact + [(x, Fraction(b)) for x, b in markers])
    hull = _lower_hull(all_pts)
    certified = True
    if any(x in (0, r) for x, _ in markers):
        certified = False
    elif markers:
        base = _lower_hull(sorted(exact))
        for x, b in markers:
            h = _hull_value(base, x)
            if h is None or b < h:
                certified = False
                break
    return ConvexPolygon(hull, certified)


def lies_above(P, Q):
    """True iff P(x) >= Q(x) on [0, width]."""
    if P.width != Q.width:
        raise ValueError("polygons of different widths")
    xs = sorted({x for x, _ in P.breaks} | {x for x, _ in Q.breaks})
    return all(P(x) >= Q(x) for x in xs)


def is_straight_line(P):
    return len(P.breaks) == 2


def same_endpoints(P, Q):
    return P.breaks[0] == Q.breaks[0] and P.breaks[-1] == Q.breaks[-1]


class SlopeMultiset:
    """Isoclinic summands V(m/n): entries (slope m/n, number of summands)."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        merged = {}
        for s, c in entries:
            s = Fraction(s)
            if c <= 0:
                raise ValueError("multiplicities must be positive")
            merged[s] = merged.get(s, 0) + c
        self.entries = tuple(sorted(merged.items()))

    @classmethod
    def from_polygon(cls, P):
        entries = []
        for s, length in P.slope_lengths():
            n = s.denominator
            if length % n:
                raise AssertionError(f"segment of slope {s} has length {length} not divisible by {n}")
            entries.append((s, length // n))
        return cls(entries)

    def rank(self):
        return sum(s.denominator * c for s, c in self.entries)

    def dim(self):
        return sum(s.numerator * c for s, c in self.entries)

    def polygon(self):
        slopes = []
        for s, c in self.entries:
            slopes.extend([s] * (s.denominator * c))
        return ConvexPolygon.from_slopes(slopes)

    def __eq__(self, other):
        return isinstance(other, SlopeMultiset) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = ", ".join(f"({s}, {c})" for s, c in self.entries)
        return f"SlopeMultiset{{{body}}}"

    def to_json(self):
        return [[s.numerator, s.denominator, c] for s, c in self.entries]

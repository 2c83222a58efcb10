"""JSON encoding of field elements, series, polynomials, modules and sheaves.

Elements are little-endian F_p digit lists of length e.  A series is either
a list of elements (an exact polynomial in z) or {"val", "coeffs", "prec"}
with ``prec`` null for exact values.
"""
from __future__ import annotations

import json
from importlib import resources

import jsonschema

from .errors import MalformedInput
from .gf import field_from_spec, make_field, parse_field_spec
from .isocrystal import DieudonneModule
from .motive import AbelianSheafP1
from .series import INF, CharValue, Poly, TruncSeries

SCHEMA_NAMES = ("module", "sheaf")


def load_schema(name):
    text = resources.files("abelsheaf").joinpath("schemas").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def check_schema(doc, name):
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise MalformedInput(f"{name} document: {exc.message}" + (f" at /{path}" if path else ""))


def dumps(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# scalars


def encode_element(F, v):
    return list(F.digits(v))


def decode_element(F, x):
    if isinstance(x, bool):
        raise MalformedInput("element must be a digit list or an integer")
    if isinstance(x, int):
        x = [x]
    if not isinstance(x, list) or len(x) > F.e:
        raise MalformedInput(f"element {x!r} is not a digit list of length <= {F.e}")
    for c in x:
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c < F.p:
            raise MalformedInput(f"digit {c!r} not in 0..{F.p - 1}")
    return F.from_digits(x)


def encode_ground(F, q):
    return f"{F.p}^{F.ground_degree(q)}"


def decode_ground(text, F):
    """'p^g' or the integer q; must be a subfield of F."""
    try:
        if isinstance(text, int) and not isinstance(text, bool):
            q = text
        else:
            p, g = parse_field_spec(text)
            if p != F.p:
                raise MalformedInput(f"ground field {text} has the wrong characteristic")
            q = p ** g
        F.ground_degree(q)
    except (ValueError, TypeError) as exc:
        raise MalformedInput(f"bad ground field {text!r}: {exc}")
    return q


def decode_field(text):
    try:
        return field_from_spec(text)
    except (ValueError, TypeError) as exc:
        raise MalformedInput(f"bad field {text!r}: {exc}")


# ---------------------------------------------------------------------------
# series and polynomials


def encode_series(s):
    F = s.field
    if s.prec == INF and (not s.coeffs or s.val >= 0):
        lead = [] if not s.coeffs else [0] * s.val
        return [encode_element(F, c) for c in lead + list(s.coeffs)]
    return {"val": s.val if s.coeffs else (s.prec if s.prec != INF else 0),
            "coeffs": [encode_element(F, c) for c in s.coeffs],
            "prec": None if s.prec == INF else s.prec}


def decode_series(F, x):
    if isinstance(x, list):
        return TruncSeries(F, 0, [decode_element(F, c) for c in x])
    if isinstance(x, dict):
        prec = x.get("prec")
        prec = INF if prec is None else prec
        coeffs = [decode_element(F, c) for c in x["coeffs"]]
        if prec != INF and x["val"] + len(coeffs) > prec:
            raise MalformedInput("series has coefficients beyond its precision")
        return TruncSeries(F, x["val"], coeffs, prec)
    raise MalformedInput(f"series {x!r} must be a list or an object")


def encode_poly(P):
    F = P.field
    return [encode_element(F, c) for c in P.coeffs]


def decode_poly(F, x):
    if not isinstance(x, list):
        raise MalformedInput("polynomial must be a list of elements")
    return Poly(F, [decode_element(F, c) for c in x])


def encode_matrix(A, enc):
    return [[enc(a) for a in row] for row in A]


def _square(rows, r, what):
    if len(rows) != r or any(len(row) != r for row in rows):
        raise MalformedInput(f"{what} must be {r} x {r}")


# ---------------------------------------------------------------------------
# modules


def module_to_json(M):
    F = M.field
    return {
        "field": F.spec,
        "q_ground": encode_ground(F, M.q),
        "rank": M.rank,
        "dim": M.dim,
        "zeta": encode_element(F, M.zeta.value),
        "U": encode_matrix(M.U, encode_series),
        "prec": M.prec,
    }


def module_from_json(doc, field=None, q=None, prec=None):
    """Parse a module document; ``field``/``q`` fill in or must agree with
    the document, ``prec`` overrides its working precision."""
    check_schema(doc, "module")
    F = _agree("field", doc.get("field"), field, decode_field)
    qq = doc.get("q_ground")
    q_doc = None if qq is None else decode_ground(qq, F)
    if q is not None and q_doc is not None and q != q_doc:
        raise MalformedInput(f"--q {q} disagrees with the document's ground field {qq}")
    q = q_doc if q_doc is not None else q
    if q is None:
        raise MalformedInput("ground field missing: give q_ground or --q")
    F.ground_degree(q)
    U = [[decode_series(F, x) for x in row] for row in doc["U"]]
    r = len(U)
    _square(U, r, "U")
    if "rank" in doc and doc["rank"] != r:
        raise MalformedInput(f"rank {doc['rank']} disagrees with the {r} x {r} matrix U")
    zeta = CharValue(F, decode_element(F, doc.get("zeta", 0)))
    N = prec if prec is not None else doc.get("prec")
    return DieudonneModule(F, q, U, doc["dim"], zeta, N)


def _agree(name, doc_value, given, parse):
    if doc_value is None and given is None:
        raise MalformedInput(f"{name} missing: give it in the document or on the command line")
    if doc_value is None:
        return given
    parsed = parse(doc_value)
    if given is not None and given is not parsed:
        raise MalformedInput(f"--{name} {given.spec} disagrees with the document ({doc_value})")
    return parsed


# ---------------------------------------------------------------------------
# sheaves


def sheaf_to_json(S):
    F = S.field
    return {
        "r": S.r, "d": S.d, "k": S.k, "l": S.l,
        "field": F.spec,
        "q_ground": encode_ground(F, S.q),
        "zeta": encode_element(F, S.zeta.value),
        "splitting": [list(n) for n in S.splitting],
        "Pi": [encode_matrix(P, encode_poly) for P in S.Pi],
        "tau": [encode_matrix(T, encode_poly) for T in S.tau],
    }


def sheaf_from_json(doc, field=None, q=None):
    check_schema(doc, "sheaf")
    F = _agree("field", doc.get("field"), field, decode_field)
    qq = doc.get("q_ground")
    q_doc = None if qq is None else decode_ground(qq, F)
    if q is not None and q_doc is not None and q != q_doc:
        raise MalformedInput(f"--q {q} disagrees with the document's ground field {qq}")
    q = q_doc if q_doc is not None else q
    if q is None:
        raise MalformedInput("ground field missing: give q_ground or --q")
    r, d = doc["r"], doc["d"]
    Pi = [[[decode_poly(F, x) for x in row] for row in P] for P in doc["Pi"]]
    tau = [[[decode_poly(F, x) for x in row] for row in T] for T in doc["tau"]]
    for P in Pi + tau:
        _square(P, r, "Pi and tau matrices")
    zeta = CharValue(F, decode_element(F, doc.get("zeta", 0)))
    S = AbelianSheafP1(F, q, r, d, doc["splitting"], Pi, tau, zeta)
    for key in ("k", "l"):
        if key in doc and doc[key] != getattr(S, key):
            raise MalformedInput(f"{key} = {doc[key]} disagrees with r = {r}, d = {d}")
    return S


def ground_field_from_q(q):
    """F_q from the integer q or the string 'p^g'."""
    try:
        if isinstance(q, str):
            p, g = parse_field_spec(q)
        else:
            p, g = _prime_power(q)
        return make_field(p, g)
    except (ValueError, TypeError) as exc:
        raise MalformedInput(f"bad ground field {q!r}: {exc}")


def _prime_power(q):
    if not isinstance(q, int) or q < 2:
        raise ValueError("q must be a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    g = 0
    while q % p == 0:
        q //= p
        g += 1
    if q != 1:
        raise ValueError("q must be a prime power")
    return p, g

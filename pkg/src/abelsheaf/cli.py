"""Command line interface: JSON in, JSON out.

Exit codes: 0 success, 1 malformed input, 2 validation failure (the report
is still printed), 3 insufficient precision (with the attempted N).
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import codec
from .errors import (AbelsheafError, FieldMismatch, InsufficientPrecision, MalformedInput,
                     ValidationFailure)
from .examples import (StandardModuleSpec, ex96_quasi_isogeny, ex96_sheaf, generate_corpus,
                       m22_scan, standard_check)
from .gf import make_field
from .isocrystal import (classify, find_invertible, hodge_polygon, isogeny_solve,
                         newton_polygon, validate)
from .motive import in_isoclinic_locus, tau_invariants, validate_sheaf

SUBCOMMANDS = ("newton", "hodge", "classify", "validate", "isogeny", "tau-inv", "m22-scan",
               "standard-check", "ex96", "corpus")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise MalformedInput(message)


def _common(sp):
    sp.add_argument("--field", help="base field p^e")
    sp.add_argument("--q", help="sigma ground field: q or p^g")
    sp.add_argument("--prec", type=int, help="working precision N")
    sp.add_argument("--out", help="also write the result to this path")
    sp.add_argument("--json", dest="inline", help="input document as inline JSON")


def build_parser():
    ap = _Parser(prog="abelsheaf", description="Dieudonne modules and abelian sheaves on P^1.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("newton", "hodge", "classify"):
        sp = sub.add_parser(name)
        _common(sp)
        sp.add_argument("--module", help="module document path")
    sp = sub.add_parser("validate")
    _common(sp)
    sp.add_argument("--module", help="module document path")
    sp.add_argument("--sheaf", help="sheaf document path")
    sp = sub.add_parser("isogeny")
    _common(sp)
    sp.add_argument("--module", help="source module document path")
    sp.add_argument("--target", required=True, help="target module: path or inline JSON")
    sp.add_argument("--h", type=int, default=0, help="pole order bound")
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("tau-inv")
    _common(sp)
    sp.add_argument("--sheaf", help="sheaf document path")
    sp.add_argument("--a", required=True, help="JSON polynomial in t defining I")
    sp.add_argument("--ext", type=int, default=1, help="degree of the splitting field over the base")
    sp = sub.add_parser("m22-scan")
    _common(sp)
    sp.add_argument("--m", type=int, required=True)
    sp = sub.add_parser("standard-check")
    _common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--e", type=int, default=1)
    sp = sub.add_parser("ex96")
    _common(sp)
    sp.add_argument("--mm", type=int, default=1)
    sp.add_argument("--b", required=True, help="JSON polynomial b(t) over F_q")
    sp = sub.add_parser("corpus")
    sp.add_argument("--out", required=True, help="corpus directory")
    return ap


# ---------------------------------------------------------------------------
# input helpers


def _read_json(value, what):
    text = value
    if not value.lstrip().startswith(("{", "[")):
        try:
            with open(value, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise MalformedInput(f"cannot read {what} {value!r}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{what} is not valid JSON: {exc.msg} at line {exc.lineno}")


def _input_doc(args, *names):
    given = [(n, getattr(args, n)) for n in names if getattr(args, n, None) is not None]
    if args.inline is not None:
        given.append(("json", args.inline))
    if len(given) != 1:
        flags = ", ".join("--" + n for n in names + ("json",))
        raise MalformedInput(f"give exactly one of {flags}")
    name, value = given[0]
    doc = _read_json(value, "input document")
    if not isinstance(doc, dict):
        raise MalformedInput("input document must be a JSON object")
    return name, doc


def _field(args):
    return None if args.field is None else codec.decode_field(args.field)


def _q(args, F):
    if args.q is None:
        return None
    if F is None:
        return codec.ground_field_from_q(_q_value(args.q)).order
    return codec.decode_ground(_q_value(args.q), F)


def _q_value(text):
    return int(text) if text.isdigit() else text


def _module(args, doc):
    F = _field(args)
    return codec.module_from_json(doc, F, _q(args, F), args.prec)


def _sheaf(args, doc):
    F = _field(args)
    return codec.sheaf_from_json(doc, F, _q(args, F))


def _ground(args):
    if args.q is None:
        raise MalformedInput("--q is required")
    return codec.ground_field_from_q(_q_value(args.q))


# ---------------------------------------------------------------------------
# subcommands


def _slopes_list(P):
    return [[s.numerator, s.denominator] for s in P.slopes()]


def cmd_newton(args):
    M = _module(args, _input_doc(args, "module")[1])
    P = newton_polygon(M, args.prec)
    return {"slopes": _slopes_list(P), "certified": P.certified}, 0


def cmd_hodge(args):
    M = _module(args, _input_doc(args, "module")[1])
    P = hodge_polygon(M)
    return {"slopes": _slopes_list(P), "breaks": P.to_json()["breaks"]}, 0


def cmd_classify(args):
    M = _module(args, _input_doc(args, "module")[1])
    S = classify(M, args.prec)
    return {"slopes": S.to_json(), "isoclinic": len(S.entries) == 1,
            "rank": S.rank(), "dim": S.dim()}, 0


def cmd_validate(args):
    kind, doc = _input_doc(args, "module", "sheaf")
    if kind == "json":
        kind = "sheaf" if "tau" in doc else "module"
    if kind == "module":
        rep = validate(_module(args, doc))
    else:
        rep = validate_sheaf(_sheaf(args, doc))
    rep = {"kind": kind, **_jsonable(rep)}
    return rep, 0 if rep["valid"] else 2


def cmd_isogeny(args):
    M = _module(args, _input_doc(args, "module")[1])
    tdoc = _read_json(args.target, "target")
    if not isinstance(tdoc, dict):
        raise MalformedInput("target must be a JSON object")
    Mp = codec.module_from_json(tdoc, M.field, M.q, args.prec)
    space = isogeny_solve(M, Mp, args.h, args.prec)
    Phi = find_invertible(space, random.Random(args.seed))
    enc = lambda A: codec.encode_matrix(A, codec.encode_series)
    return {
        "h": args.h,
        "prec": space.N,
        "dimension": space.dimension,
        "basis": [enc(B) for B in space.basis_matrices()],
        "invertible": None if Phi is None else enc(Phi),
    }, 0


def cmd_tau_inv(args):
    S = _sheaf(args, _input_doc(args, "sheaf")[1])
    a_doc = _read_json(args.a, "--a")
    a = codec.decode_poly(S.field, a_doc)
    if args.ext < 1:
        raise MalformedInput("--ext must be positive")
    L = make_field(S.field.p, S.field.e * args.ext)
    try:
        T = tau_invariants(S, a, L)
    except ValueError as exc:
        raise MalformedInput(str(exc))
    return {"field": L.spec, "dimension_Fp": T.dimension, "cardinality": T.cardinality,
            "expected": S.q ** (S.r * a.degree())}, 0


def cmd_m22_scan(args):
    K = _ground(args)
    try:
        return m22_scan(K.order, args.m), 0
    except ValueError as exc:
        raise MalformedInput(str(exc))


def cmd_standard_check(args):
    K = _ground(args)
    try:
        spec = StandardModuleSpec(args.k, args.l, args.e, K.order)
    except ValueError as exc:
        raise MalformedInput(str(exc))
    return standard_check(spec), 0


def cmd_ex96(args):
    K = _ground(args)
    b = codec.decode_poly(K, _read_json(args.b, "--b"))
    S = ex96_sheaf(args.mm, b, K.order)
    Phi, L, rep = ex96_quasi_isogeny(S)
    return {
        "field": L.spec,
        "u": codec.encode_poly(Phi[0][1]),
        "report": rep,
        "isoclinic": bool(in_isoclinic_locus(S)),
    }, 0


def cmd_corpus(args):
    paths = generate_corpus(args.out)
    return {"written": [os.path.relpath(p, args.out) for p in paths]}, 0


COMMANDS = {
    "newton": cmd_newton, "hodge": cmd_hodge, "classify": cmd_classify,
    "validate": cmd_validate, "isogeny": cmd_isogeny, "tau-inv": cmd_tau_inv,
    "m22-scan": cmd_m22_scan, "standard-check": cmd_standard_check, "ex96": cmd_ex96,
    "corpus": cmd_corpus,
}


def _jsonable(x):
    """Reports may hold tuples, fractions or library objects."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


def _error(kind, message, **extra):
    return {"error": {"kind": kind, "message": message, **extra}}


def run(argv):
    """Returns (exit code, result document)."""
    return _run(argv)[:2]


def _run(argv):
    out = None
    try:
        args = build_parser().parse_args(argv)
        if args.cmd != "corpus":
            out = args.out
        code, doc = _dispatch(args)
    except InsufficientPrecision as exc:
        return 3, _error("insufficient_precision", str(exc), precision=exc.precision), out
    except ValidationFailure as exc:
        return 2, {"valid": False, "message": str(exc), "report": _jsonable(exc.report)}, out
    except (MalformedInput, FieldMismatch, ValueError, ZeroDivisionError) as exc:
        return 1, _error("malformed_input", str(exc)), out
    except AbelsheafError as exc:
        return 1, _error(type(exc).__name__, str(exc)), out
    return code, _jsonable(doc), out


def _dispatch(args):
    doc, code = COMMANDS[args.cmd](args)
    return code, doc


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    code, doc, out = _run(argv)
    text = codec.dumps(doc) + "\n"
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

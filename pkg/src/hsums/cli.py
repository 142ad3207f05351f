"""Command-line interface: evaluation, verification, derivation, and algebra.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 numeric-domain error (poles, precision), 4 reconstruction or solver
failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import List, Optional

import mpmath as mp

from . import corpus as corpus_mod
from .continuation import EvalContext, evaluate
from .core import IndexVector, build_ansatz, build_basis, solver_unknown_count
from .engine import (IdentityRecord, SamplePlan, compose_trilinear,
                     derive_identity, reflect, verify_identity)
from .errors import (CorpusSyntaxError, CorpusValidationError, HsumsError,
                     IllConditionedError, MissingBilinearError,
                     PoleProximityError, PrecisionExhaustedError,
                     ReconstructionFailedError, VerificationFailedError)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_SOLVER = 4

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*"
    r"(?P<im>[+-]\s*\d*(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*(?P<unit>[ij])?\s*$")


class UsageError(Exception):
    pass


def parse_indices(text: str) -> IndexVector:
    try:
        return IndexVector(int(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError as exc:
        raise UsageError(f"bad index list {text!r}: {exc}") from exc


def parse_complex(text: str) -> complex:
    """Parse literals like '2', '-1.5', '0.3+0.7i', '1-2j', '0.5i'."""
    t = text.strip().replace(" ", "")
    if not t:
        raise UsageError("empty complex literal")
    try:
        if t[-1] in "ij":
            body = t[:-1]
            for k in range(len(body) - 1, -1, -1):
                if body[k] in "+-" and (k == 0 or body[k - 1] not in "eE"):
                    re_part = body[:k] or "0"
                    im_part = body[k:] if body[k:] not in ("+", "-") else body[k] + "1"
                    return complex(float(re_part), float(im_part))
            return complex(0.0, float(body) if body not in ("", "+", "-") else
                           float(body + "1"))
        return complex(float(t), 0.0)
    except ValueError as exc:
        raise UsageError(f"bad complex literal {text!r}") from exc


def _load_corpus(path: Optional[str]) -> corpus_mod.CorpusFile:
    return corpus_mod.load_corpus(path or corpus_mod.default_corpus_path())


def _print_record(rec: IdentityRecord, fmt: str) -> None:
    if fmt == "structured":
        print(corpus_mod.record_to_json(rec))
    else:
        print(corpus_mod.serialize_identity(rec))


def cmd_eval(args) -> int:
    v = parse_indices(args.indices)
    z = parse_complex(args.z)
    ctx = EvalContext(digits=args.digits)
    val = evaluate(v, z, ctx)
    bound = ctx.reported_error_bound(v)
    with mp.workdps(args.digits):
        if args.format == "structured":
            print(json.dumps({
                "indices": list(v.indices),
                "z": [z.real, z.imag],
                "digits": args.digits,
                "re": mp.nstr(mp.re(val), args.digits),
                "im": mp.nstr(mp.im(val), args.digits),
                "error_bound": mp.nstr(bound, 3),
            }, indent=2, sort_keys=True))
        else:
            print(f"{mp.nstr(val, args.digits)}")
            print(f"error bound <= {mp.nstr(bound, 3)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    corpus = _load_corpus(args.corpus)
    ctx = EvalContext(digits=args.digits)
    worst = mp.mpf(0)
    failures = 0
    rows = []
    for rec in corpus:
        rep = verify_identity(rec, points=args.points, tol=args.tolerance,
                              seed=args.seed, ctx=ctx)
        status = "pass" if rep.passed else "FAIL"
        failures += 0 if rep.passed else 1
        worst = max(worst, rep.max_residual)
        rows.append((corpus_mod.serialize_identity(rec).split(" = ")[0],
                     mp.nstr(rep.max_residual, 3), status))
    if args.format == "structured":
        print(json.dumps({
            "points": args.points,
            "tolerance": args.tolerance,
            "seed": args.seed,
            "results": [{"left": l, "max_residual": r, "status": s} for l, r, s in rows],
            "failures": failures,
        }, indent=2, sort_keys=True))
    else:
        for l, r, s in rows:
            print(f"{l:<24} max residual {r:<12} {s}")
        print(f"{len(rows) - failures}/{len(rows)} identities verified "
              f"(tol {args.tolerance:g}, {args.points} points, seed {args.seed})")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def cmd_derive(args) -> int:
    a = parse_indices(args.left)
    b = parse_indices(args.right)
    plan = SamplePlan(count=args.count, seed=args.seed)
    ctx = EvalContext(digits=args.digits)
    rec = derive_identity(a, b, plan, ctx)
    _print_record(rec, args.format)
    return EXIT_OK


def cmd_shuffle(args) -> int:
    from .shuffle import stuffle_product
    a = parse_indices(args.a)
    b = parse_indices(args.b)
    expr = stuffle_product(a, b)
    print(corpus_mod.serialize_expression(expr).replace(" ", ""))
    return EXIT_OK


def cmd_reflect(args) -> int:
    if args.identity:
        rec = corpus_mod.parse_identity(args.identity)
        _print_record(reflect(rec), args.format)
        return EXIT_OK
    corpus = _load_corpus(args.corpus)
    for rec in corpus:
        _print_record(reflect(rec), args.format)
    return EXIT_OK


def cmd_compose(args) -> int:
    corpus = _load_corpus(args.corpus)
    rec = compose_trilinear(parse_indices(args.a), parse_indices(args.b),
                            parse_indices(args.c), corpus)
    _print_record(rec, args.format)
    return EXIT_OK


def cmd_basis(args) -> int:
    if args.ansatz:
        entries = build_ansatz(args.weight)
        if args.count:
            print(len(entries))
            return EXIT_OK
        for cm, v in entries:
            left = "" if cm.is_one else str(cm)
            sym = "" if v is None else "s[" + ",".join(str(a) for a in v.indices) + "]"
            print("*".join(p for p in (left, sym) if p) or "1")
        return EXIT_OK
    if args.unknowns:
        print(solver_unknown_count(args.weight))
        return EXIT_OK
    basis = build_basis(args.weight)
    if args.count:
        print(len(basis))
        return EXIT_OK
    for v in basis:
        print("s[" + ",".join(str(a) for a in v.indices) + "]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hsums",
        description="Nested harmonic sums on the complex plane and their "
                    "weight-4 reflection identities.")
    p.add_argument("--verbose", action="store_true", help="print resolved options")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, digits=30):
        sp.add_argument("--digits", type=int, default=digits,
                        help=f"working precision in decimal digits (default {digits})")
        sp.add_argument("--format", choices=("text", "structured"), default="text")

    sp = sub.add_parser("eval", help="evaluate one harmonic sum at a complex point")
    sp.add_argument("-i", "--indices", required=True, help="comma-separated indices")
    sp.add_argument("-z", required=True, help="complex argument, e.g. '0.3+0.7i'")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("verify", help="verify every identity in a corpus file")
    sp.add_argument("--corpus", help="corpus path (default: bundled corpus)")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--tolerance", type=float, default=1e-10)
    sp.add_argument("--seed", type=int, default=715)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("derive", help="derive one reflection identity from samples")
    sp.add_argument("--left", required=True, help="indices of the z-argument sum")
    sp.add_argument("--right", required=True, help="indices of the -1-z-argument sum")
    sp.add_argument("--count", type=int, default=250, help="sample points (>= 200)")
    sp.add_argument("--seed", type=int, default=SamplePlan().seed)
    common(sp, digits=100)
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("shuffle", help="quasi-shuffle decomposition of a product")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.set_defaults(func=cmd_shuffle, format="text")

    sp = sub.add_parser("reflect", help="swap z and -1-z throughout identities")
    sp.add_argument("--corpus", help="corpus path (default: bundled corpus)")
    sp.add_argument("--identity", help="reflect a single compact-notation identity")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_reflect)

    sp = sub.add_parser("compose", help="trilinear identity via quasi-shuffle + corpus")
    sp.add_argument("--a", required=True, help="z-argument factor")
    sp.add_argument("--b", required=True, help="first -1-z-argument factor")
    sp.add_argument("--c", required=True, help="second -1-z-argument factor")
    sp.add_argument("--corpus", help="corpus path (default: bundled corpus)")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_compose)

    sp = sub.add_parser("basis", help="inspect bases and the expansion ansatz")
    sp.add_argument("--weight", type=int, required=True, choices=(1, 2, 3, 4))
    sp.add_argument("--count", action="store_true", help="print only the length")
    sp.add_argument("--ansatz", action="store_true", help="list the expansion ansatz")
    sp.add_argument("--unknowns", action="store_true",
                    help="print the derivation unknown count")
    sp.set_defaults(func=cmd_basis, format="text")

    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.verbose:
        opts = {k: v for k, v in vars(args).items() if k != "func"}
        print(f"resolved options: {opts}", file=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusSyntaxError, CorpusValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PoleProximityError, PrecisionExhaustedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ReconstructionFailedError, IllConditionedError,
            VerificationFailedError, MissingBilinearError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HsumsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

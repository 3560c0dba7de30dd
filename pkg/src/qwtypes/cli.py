"""``qw``: command-line access to stages, equality, invariants and folds.

Exit codes: 0 success, 1 usage error, 2 validation or equation failure,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .algebra import (
    FiniteAlgebra,
    check_rules,
    describe_witness,
    fold,
    load_algebra,
    random_satisfying_algebra,
)
from .canonical import canonical_form, crosscheck
from .errors import QWError, UnsupportedRuleSet
from .hered import HfSet, hf_enumerate
from .ordinal_tools import aleph, f_surjection, table_csv
from .signature import load_signature
from .stages import Caps, StageFamily
from .terms import parse_term

COMMANDS = (
    "validate stages eq canon rank tc rn fsurj fold check-algebra hf-enum crosscheck export-dot"
).split()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _read_arg(text: str) -> str:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return fh.read()
    return text


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "dot", "csv"], default="text")
    common.add_argument("--max-classes", type=int, default=100_000)
    common.add_argument("--max-assignments", type=int, default=10_000_000)
    common.add_argument("--max-enumeration", type=int, default=1_000_000)

    parser = _Parser(prog="qw", description="Stages, equality, invariants and folds for image-preserving QW-types.")
    parser.add_argument("--version", action="version", version=f"qw {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help, depth=None):
        p = sub.add_parser(name, help=help, parents=[common])
        p.add_argument("signature", help="signature JSON file")
        if depth is not None:
            p.add_argument("--depth", type=int, default=depth)
        return p

    add("validate", "check a signature file")
    p = add("stages", "build Q(0..depth)", depth=4)
    p.add_argument("--counts", action="store_true", help="print only |Q(0)| .. |Q(depth)|")
    p = add("eq", "decide equality of two terms")
    p.add_argument("left")
    p.add_argument("right")
    for name, help in (("canon", "class and normal form of a term"), ("rank", "rank of a term"), ("tc", "transitive closure of a term's class")):
        add(name, help).add_argument("term")
    p = add("rn", "R_n of a term's class")
    p.add_argument("term")
    p.add_argument("-n", type=int, required=True)
    p = add("fsurj", "table of the surjection F_{x,n}")
    p.add_argument("term")
    p.add_argument("-n", type=int, required=True)
    for name, help in (("fold", "fold the stage family into an algebra"), ("check-algebra", "check an algebra against the equations")):
        p = add(name, help, depth=4 if name == "fold" else None)
        p.add_argument("algebra", nargs="?", help="algebra JSON file")
        p.add_argument("--random-algebra", type=int, metavar="CARRIER", help="draw a random satisfying algebra instead")
        p.add_argument("--seed", type=int, default=None)
        if name == "fold":
            p.add_argument("--term", help="print only the value of this term")
    p = add("hf-enum", "hereditarily small sets by rank")
    p.add_argument("--max-rank", type=int, required=True)
    p = add("crosscheck", "stage partition vs canonical forms")
    p.add_argument("--max-stage", type=int, required=True)
    add("export-dot", "stage graph in DOT", depth=4)
    return parser


def _caps(args) -> Caps:
    for name in ("max_classes", "max_assignments", "max_enumeration"):
        if getattr(args, name) <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return Caps(args.max_classes, args.max_assignments, args.max_enumeration)


def _algebra(args, sig) -> FiniteAlgebra:
    if (args.algebra is None) == (args.random_algebra is None):
        raise UsageError("give exactly one of ALGEBRA or --random-algebra")
    if args.algebra is not None:
        return load_algebra(args.algebra, sig.poly)
    if args.random_algebra < 1:
        raise UsageError("--random-algebra needs a positive carrier size")
    seed = args.seed if args.seed is not None else int(os.environ.get("QW_SEED", "0"))
    return random_satisfying_algebra(sig.poly, sig.rules, args.random_algebra, np.random.default_rng(seed))


def _fmt_set(xs) -> str:
    return "{" + ", ".join(str(x) for x in sorted(xs)) + "}"


def _dispatch(args):
    """Run one subcommand; return (result for JSON, text lines, stats)."""
    sig = load_signature(args.signature)
    poly, rules = sig.poly, sig.rules
    caps = _caps(args)
    sf = StageFamily(poly, rules, caps)
    depth = getattr(args, "depth", None)
    if depth is not None:
        if depth < 0:
            raise UsageError("--depth must be non-negative")
        sf.extend(depth)
    term = lambda text: parse_term(_read_arg(text), poly)  # noqa: E731
    cmd = args.command

    if cmd == "validate":
        fams = [type(f).__name__ for f in rules.families]
        result = {"constructors": len(poly), "explicit": len(rules.explicit), "families": fams}
        return result, [f"ok: {len(poly)} constructors, {len(rules.explicit)} explicit equations, families {fams}"], {}

    if cmd in ("stages", "export-dot"):
        if cmd == "export-dot" or args.format == "dot":
            return sf.to_json(), [sf.to_dot().rstrip("\n")], {}
        if args.counts:
            return sf.stage_sizes, [" ".join(map(str, sf.stage_sizes))], {}
        lines = ["id,stage,rank,members,image,representative"] if args.format == "csv" else []
        for x, info in enumerate(sf.classes):
            image = " ".join(map(str, sorted(info.image)))
            if args.format == "csv":
                lines.append(f'{x},{info.first_stage},{info.rank},{len(sf.members[x])},"{image}","{sf.label(x)}"')
            else:
                lines.append(f"{x}\tstage {info.first_stage}\trank {info.rank}\timage {{{image}}}\t{sf.label(x)}")
        if args.format != "csv":
            lines.append("sizes: " + " ".join(map(str, sf.stage_sizes)))
        return sf.to_json(), lines, {}

    if cmd == "eq":
        t1, t2 = term(args.left), term(args.right)
        same = sf.decide_eq(t1, t2)
        return {"equal": same}, ["equal" if same else "distinct"], {}

    if cmd in ("canon", "rank", "tc", "rn", "fsurj"):
        t = term(args.term)
        x = sf.canonicalize(t)
        if cmd == "canon":
            try:
                form = canonical_form(rules, poly)(t)
                form = form.render() if isinstance(form, HfSet) else form.render(poly)
            except UnsupportedRuleSet:
                form = sf.label(x)
            result = {"class": x, "rank": sf.rank(x), "canonical": form}
            return result, [f"class {x} rank {sf.rank(x)} canonical {form}"], {}
        if cmd == "rank":
            return sf.rank(x), [str(sf.rank(x))], {"class": x}
        if cmd == "tc":
            tc = sorted(sf.transitive_closure(x))
            return tc, [_fmt_set(tc)], {"class": x}
        if args.n < 1:
            raise UsageError("-n must be at least 1")
        if cmd == "rn":
            rn = sorted(sf.r_n(x, args.n))
            return rn, [_fmt_set(rn)], {"class": x}
        table = f_surjection(sf, x, args.n)
        result = [{"args": list(k), "value": v} for k, v in sorted(table.items())]
        return result, [table_csv(table, args.n).rstrip("\n")], {"class": x, "kappa": aleph(poly)}

    if cmd == "check-algebra":
        alg = _algebra(args, sig)
        sat = check_rules(alg, rules)
        if not sat:
            raise _Violation(describe_witness(poly, sat.witness))
        return {"satisfies": True}, ["satisfies"], {"carrier": alg.carrier}

    if cmd == "fold":
        alg = _algebra(args, sig)
        if args.term:
            t = term(args.term)
            x = sf.canonicalize(t)
            h = fold(sf, alg)
            return h[x], [str(h[x])], {"class": x, "carrier": alg.carrier}
        h = fold(sf, alg)
        lines = [f"{x}\t{v}\t{sf.label(x)}" for x, v in h.items()]
        return {str(x): v for x, v in h.items()}, lines, {"carrier": alg.carrier}

    if cmd == "hf-enum":
        values = hf_enumerate(poly, args.max_rank, caps.max_enumeration)
        rendered = [v.render() for v in values]
        return rendered, rendered, {"count": len(values)}

    if cmd == "crosscheck":
        report = crosscheck(poly, rules, args.max_stage, caps)
        result = {
            "agree": report.agree,
            "terms": report.terms,
            "classes": report.classes,
            "counts": report.counts_stages,
            "canonical_counts": report.counts_canonical,
        }
        if not report.agree:
            raise _Violation("\n".join(report.lines(poly)))
        return result, report.lines(poly), {}

    raise UsageError(f"unknown command {cmd!r}")


class _Violation(QWError):
    pass


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        result, lines, stats = _dispatch(args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=err)
        print(exc, file=err)
        return 1
    except QWError as exc:
        print(f"{type(exc).__name__}: {exc}", file=err)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 1

    if args.format == "json":
        doc = {"command": args.command, "result": result, "stats": stats}
        print(json.dumps(doc, sort_keys=True, ensure_ascii=False), file=out)
    else:
        for line in lines:
            print(line, file=out)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

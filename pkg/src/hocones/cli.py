"""Command-line front end.

Exit codes: 0 Accepted / no violation found / no contradiction, 1 Rejected or
contradiction found, 2 violated optimality condition, 3 Inconclusive,
64 usage error, 65 problem-file error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .cones import (DirectionCollection, SliceKind, SliceSpec, Status, member_first_order,
                    member_slice, sample_cone)
from .optcheck import Verdict, disqualify
from .problemfile import ProblemFileError, load
from .propsuite import SUITES, run_suite
from .sets import BENCHMARKS

EX_OK, EX_REJECTED, EX_VIOLATED, EX_INCONCLUSIVE = 0, 1, 2, 3
EX_USAGE, EX_DATAERR = 64, 65

_STATUS_EXIT = {Status.ACCEPTED: EX_OK, Status.REJECTED: EX_REJECTED,
                Status.INCONCLUSIVE: EX_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _load(path):
    try:
        return load(path)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror or exc}") from None


def _slice(text):
    try:
        return SliceSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _collection(prob, name, spec):
    if name is None:
        if spec.kind is SliceKind.FIRST_ORDER:
            return DirectionCollection(prob.point)
        raise UsageError("--coll is required for this slice")
    if name not in prob.collections:
        raise UsageError(f"unknown collection {name!r}; file defines {sorted(prob.collections)}")
    return DirectionCollection(prob.point, prob.collections[name])


def _vector(text, n):
    try:
        v = np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise UsageError(f"--w: expected comma-separated numbers, got {text!r}") from None
    if len(v) != n:
        raise UsageError(f"--w: expected {n} components, got {len(v)}")
    return v


def cmd_member(args) -> int:
    prob = _load(args.file)
    spec = _slice(args.slice)
    coll = _collection(prob, args.coll, spec)
    w = _vector(args.w, prob.dimension)
    cfg = prob.scan_config()
    if spec.kind is SliceKind.FIRST_ORDER:
        if coll.order != 1:
            raise UsageError("the first-order slice takes no collection directions")
        verdict = member_first_order(prob.set, prob.point, w, cfg=cfg)
    else:
        if coll.order < 2:
            raise UsageError(f"slice {spec} needs a collection with at least one direction")
        verdict = member_slice(prob.set, coll, w, spec, cfg)
    print(f"verdict: {verdict.status}")
    if verdict.decisive_level is not None:
        print(f"decisive level: {verdict.decisive_level}")
    if verdict.note:
        print(f"note: {verdict.note}")
    print(verdict.to_csv(), end="")
    return _STATUS_EXIT[verdict.status]


def cmd_sample(args) -> int:
    prob = _load(args.file)
    spec = _slice(args.slice)
    coll = _collection(prob, args.coll, spec)
    if spec.kind is SliceKind.FIRST_ORDER and coll.order != 1:
        raise UsageError("the first-order slice takes no collection directions")
    if spec.kind is not SliceKind.FIRST_ORDER and coll.order < 2:
        raise UsageError(f"slice {spec} needs a collection with at least one direction")
    if args.resolution < 1:
        raise UsageError("--resolution must be positive")
    seed = int(prob.config.get("seed", 0)) if args.seed is None else args.seed
    rows = sample_cone(prob.set, coll, spec, args.resolution, prob.scan_config(), seed=seed)
    n = prob.dimension
    lines = [",".join(["index"] + [f"d{i}" for i in range(1, n + 1)] + ["status"])]
    for i, (d, v) in enumerate(rows):
        lines.append(",".join([str(i)] + [_fmt(x) for x in d] + [str(v.status)]))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ProblemFileError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)
    return EX_OK


def cmd_checkmin(args) -> int:
    prob = _load(args.file)
    if prob.objective is None:
        raise UsageError("the problem file has no objective")
    if not 2 <= args.max_order <= 6:
        raise UsageError("--max-order must lie in 2..6")
    try:
        result = disqualify(prob.objective, prob.set, prob.point, args.max_order, prob.sample_config())
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None
    print(result.to_text(), end="")
    if result.verdict is Verdict.VIOLATED:
        return EX_VIOLATED
    if result.verdict is Verdict.CONSISTENT:
        return EX_OK
    return EX_INCONCLUSIVE


def cmd_verify_props(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    sets = [s.strip() for s in args.sets.split(",") if s.strip()]
    unknown = [s for s in sets if s not in BENCHMARKS]
    if unknown or not sets:
        raise UsageError(f"unknown benchmark set(s) {unknown}; choose from {sorted(BENCHMARKS)}")
    results = [run_suite(s, sets=sets, resolution=args.resolution) for s in suites]
    print(f"{'suite':<6} {'pass':>6} {'fail':>6} {'inconcl':>8}")
    for r in results:
        print(f"{r.name:<6} {r.passed:>6} {r.failed:>6} {r.inconclusive:>8}")
    failed = sum(r.failed for r in results)
    print(f"contradictions: {failed}")
    for r in results:
        for c in r.contradictions:
            print(f"  {r.name}: {c}")
    return EX_OK if failed == 0 else EX_REJECTED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hocones", description="High-order tangent cones and optimality checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("member", help="test one vector for membership in a cone slice")
    m.add_argument("file")
    m.add_argument("--slice", required=True, help="first-order, proper, zero, infinity, extended or alpha:<value>")
    m.add_argument("--coll", help="collection name from the problem file")
    m.add_argument("--w", required=True, help="comma-separated vector")
    m.set_defaults(func=cmd_member)

    s = sub.add_parser("sample", help="classify a grid of unit directions")
    s.add_argument("file")
    s.add_argument("--slice", required=True)
    s.add_argument("--coll")
    s.add_argument("--resolution", type=int, default=16)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("checkmin", help="search for a violated high-order necessary condition")
    c.add_argument("file")
    c.add_argument("--max-order", type=int, default=3)
    c.set_defaults(func=cmd_checkmin)

    v = sub.add_parser("verify-props", help="run the cone consistency suites on built-in sets")
    v.add_argument("--suite", default="all")
    v.add_argument("--sets", default="cusp,half-plane,parabola")
    v.add_argument("--resolution", type=int, default=16)
    v.set_defaults(func=cmd_verify_props)
    return p


def _join_vectors(argv):
    # argparse reads "--w -1,0" as two options; glue a leading-minus vector onto --w
    out, it = [], iter(argv)
    for a in it:
        if a == "--w":
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"--w={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_vectors(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hocones: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except ProblemFileError as exc:
        print(f"hocones: {args.file}: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())

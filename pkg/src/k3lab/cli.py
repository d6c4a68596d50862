"""Command-line front end."""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import monodromy as mono
from .data import FixtureError
from .suite import FAIL, SUITES, Options, run_suite


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="k3lab", description="Exact verification of the three K3 surface families.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", choices=("all",) + SUITES)
    v.add_argument("--family", action="append", choices=("1", "2", "3", "3b"),
                   help="restrict to a family (repeatable)")
    v.add_argument("--order", type=int, default=12, help="truncation order of period series")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("--timings", action="store_true", help="record runtime_ms (output is no longer reproducible)")

    m = sub.add_parser("monodromy", help="test a 4x4 integer matrix against PO and PO+")
    m.add_argument("--family", required=True, choices=("1", "2", "3"))
    m.add_argument("--check-matrix", required=True, type=Path, metavar="FILE")
    return p


def _verify(args) -> int:
    opts = Options(tuple(args.family) if args.family else None, args.order, args.timings)
    reports = run_suite(args.suite, opts)
    if args.format == "json":
        sys.stdout.write(json.dumps([r.as_dict() for r in reports], indent=1, ensure_ascii=False) + "\n")
    else:
        for r in reports:
            print(r.line() + (f" [{r.runtime_ms} ms]" if r.runtime_ms is not None else ""))
        counts = {s: sum(r.status == s for r in reports) for s in ("PASS", "ERRATUM", "FAIL", "SKIP")}
        print(" ".join(f"{k}={v}" for k, v in counts.items()))
    return 1 if any(r.status == FAIL for r in reports) else 0


def _monodromy(args) -> int:
    try:
        g = mono.read_matrix(args.check_matrix.read_text())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    Q = mono.QuadraticSpace.of_family(args.family)
    in_po = mono.in_PO(Q, g)
    plus = mono.in_PO_plus(Q, g, mono.stored_reference(args.family)) if in_po else False
    print(json.dumps({"family": args.family, "in_PO": in_po, "in_PO_plus": plus}))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        return _monodromy(args)
    except FixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

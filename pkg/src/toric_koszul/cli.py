"""Command-line entry point: run a verification suite and write a JSON report."""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .builtins import BUILTIN_FANS, builtin_fan
from .errors import ToricKoszulError
from .homology import cube
from .io import load_fan, load_json, sheaf_from_json
from .suites import SUITES, Job, run


def parse_window(text: str):
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO..HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("window LO must not exceed HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toric-koszul",
                                description="Degreewise verification suites for sheaves on smooth fans.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fan", metavar="FILE", help="fan description (JSON)")
    src.add_argument("--builtin", metavar="NAME", choices=sorted(BUILTIN_FANS),
                     help="named fan: " + ", ".join(sorted(BUILTIN_FANS)))
    p.add_argument("--sheaf", metavar="FILE", help="sheaf or line bundle description (JSON)")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--window", type=parse_window, metavar="LO..HI",
                   help="verify on the box [LO, HI]^n instead of the automatic window")
    p.add_argument("--chambers", action="store_true",
                   help="add one degree per sign-pattern chamber")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
    p.add_argument("--out", metavar="FILE", help="write the JSON report here instead of stdout")
    return p


def _attach_window(argv: List[str]) -> List[str]:
    # "--window -2..2" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for a in it:
        if a == "--window":
            out.append("--window=" + next(it, ""))
        else:
            out.append(a)
    return out


def render(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_window(argv))
    try:
        if args.builtin:
            fan, fan_label = builtin_fan(args.builtin), args.builtin
        else:
            fan, fan_label = load_fan(args.fan), load_json(args.fan)
        sheaf = sheaf_label = None
        if args.sheaf:
            sheaf_label = load_json(args.sheaf)
            sheaf = sheaf_from_json(fan, sheaf_label, args.sheaf)
    except ToricKoszulError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    window = cube(fan.rank, *args.window) if args.window else None
    job = Job(fan, args.suite, fan_label, sheaf, sheaf_label, window, args.chambers, max(1, args.jobs))
    code, report = run(job)
    text = render(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    summary = report.get("summary", {})
    for c in report["checks"]:
        if c["status"] != "pass":
            site = "" if c.get("site") is None else f" at {c['site']}"
            print(f"{c['status'].upper()}: {c['name']}{site}", file=sys.stderr)
    print(f"{args.suite}: {summary.get('checks', 0)} checks, {summary.get('failed', 0)} failed"
          f" (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

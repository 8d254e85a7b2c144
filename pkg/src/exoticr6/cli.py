"""Command line entry points.

``verify <check-id|all>`` runs checks and exits 0 (all pass), 1 (some check
failed) or 2 (some check inconclusive, none failed).  Usage errors exit 64 and
unwritable output exits 74 so they never collide with verification outcomes.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .checks import CHECK_IDS, CheckConfig
from .report import emit_report, run_pipeline, write_outputs

EXIT_USAGE = 64
EXIT_IO = 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational literal p/q: {text!r}")
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"use an exact p/q literal, not {text!r}")
    return value


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="verify", description="Exact verification of the exotic symplectic R^6 construction.")
    ap.add_argument("check", choices=list(CHECK_IDS) + ["all"], metavar="check-id|all",
                    help="one of: " + ", ".join(CHECK_IDS) + ", all")
    ap.add_argument("--threshold", type=_rational, default=Fraction(5, 1000),
                    help="target lower bound for certified checks (default 1/200)")
    ap.add_argument("--max-depth", type=_positive_int)
    ap.add_argument("--max-boxes", type=_positive_int)
    ap.add_argument("--grid-step", type=_rational)
    ap.add_argument("--samples", type=_positive_int)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=_positive_int, default=1)
    ap.add_argument("--format", choices=["text", "structured"], default="text")
    ap.add_argument("--out", help="write the report here, with certificate files alongside")
    ap.add_argument("--concurrent-checks", action="store_true", help="run the selected checks concurrently")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = CheckConfig(check_id=args.check, threshold=args.threshold, max_depth=args.max_depth,
                          max_boxes=args.max_boxes, grid_step=args.grid_step, samples=args.samples,
                          seed=args.seed, workers=args.workers)
    except ValueError as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_pipeline([args.check] if args.check != "all" else "all", cfg,
                          concurrent=args.concurrent_checks)
    text = emit_report(report, args.format)
    if args.out:
        try:
            write_outputs(report, text, args.out)
        except OSError as exc:
            print(f"verify: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return report.exit_code


def tools_main(argv=None) -> int:
    """``exoticr6-tools golden DIR`` and ``exoticr6-tools replay CERT...``."""
    from .certify import load_certificate, replay_certificate
    from .construction import write_golden

    ap = _Parser(prog="exoticr6-tools")
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("golden", help="write canonical serializations of the constructed objects")
    g.add_argument("directory")
    r = sub.add_parser("replay", help="independently re-verify branch-and-bound certificate files")
    r.add_argument("certificates", nargs="+")
    args = ap.parse_args(argv)
    if args.cmd == "golden":
        for path in write_golden(args.directory):
            print(path)
        return 0
    status = 0
    for path in args.certificates:
        cert = load_certificate(path)
        res = replay_certificate(cert)
        verdict = "ok" if res.ok else "MISMATCH"
        print(f"{path}: {verdict}  leaves={res.leaves_checked} nodes={res.nodes_evaluated} "
              f"bound={res.bound} status={cert['header'].get('status')}")
        for msg in res.discrepancies:
            print(f"  {msg}")
        status = status or (0 if res.ok else 1)
    return status


if __name__ == "__main__":
    sys.exit(main())

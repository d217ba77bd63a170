"""Command line front end: ``sfield check|converge|report <scenario>``.

Exit codes: 0 every asserted check passed, 1 some check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import SFieldError
from .scenario import FAIL, INFO, PASS, convergence_study, dumps, load_scenario, run_all_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _tol(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} is not a number") from None


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed {text!r} is not an integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _steps(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad step list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sfield", description="Pointwise verification of the bimetric vierbein field equations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("scenario", help="scenario file (TOML)")
        p.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VALUE")
        p.add_argument("--seed", type=_u64, default=None)
        p.add_argument("--points", type=int, default=None, help="random sample count (grid: points per axis)")

    c = sub.add_parser("check", help="run every check and emit a JSON report")
    common(c)
    c.add_argument("--out", default=None, help="write the report here instead of stdout")
    c.add_argument("--json", action="store_true", help="print the JSON report to stdout even with --out")

    v = sub.add_parser("converge", help="finite-difference convergence study")
    common(v)
    v.add_argument("--steps", type=_steps, required=True, help="comma-separated, strictly decreasing")
    v.add_argument("--json", action="store_true")

    r = sub.add_parser("report", help="human-readable summary")
    common(r)
    return ap


def _load(args):
    s = load_scenario(args.scenario)
    return s.with_overrides(dict(args.tol), args.seed, args.points)


def format_report(report) -> str:
    lines = [f"scenario {report.scenario}: {PASS if report.passed else FAIL}"]
    env = report.environment
    lines.append(
        f"  {env['points']} points ({env['sample_mode']}, seed {env['seed']}), "
        f"fd steps {env['fd_steps']['nested']:g}/{env['fd_steps']['divergence']:g}, "
        f"adjoint sign {env['adjoint_sign']}"
    )
    width = max(len(c.name) for c in report.checks)
    for c in report.checks:
        tol = "-" if c.tolerance is None else f"{c.tolerance:.0e}"
        mark = {PASS: "ok  ", FAIL: "FAIL", INFO: "info"}[c.status]
        lines.append(f"  {mark} {c.name:<{width}}  {c.equation:<7} max {c.max_residual:.3e}  tol {tol}")
    return "\n".join(lines)


def format_convergence(rows) -> str:
    lines = []
    for r in rows:
        res = "  ".join(f"{x:.3e}" for x in r.residuals)
        order = "-" if r.order is None else f"{r.order:.2f}"
        lines.append(f"{r.name:<20} {r.equation:<7} {res}  order {order}  {r.label}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        s = _load(args)
        if args.command == "check":
            report = run_all_checks(s)
            text = report.to_json() + "\n"
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            if args.json or not args.out:
                sys.stdout.write(text)
            return EXIT_OK if report.passed else EXIT_FAIL
        if args.command == "report":
            report = run_all_checks(s)
            print(format_report(report))
            return EXIT_OK if report.passed else EXIT_FAIL
        rows = convergence_study(s, args.steps)
        if args.json:
            print(dumps({"scenario": s.name, "rows": [r.as_dict() for r in rows]}))
        else:
            print(format_convergence(rows))
        return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL
    except SFieldError as exc:
        print(f"sfield: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"sfield: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

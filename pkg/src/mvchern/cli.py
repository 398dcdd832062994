"""Command-line interface: ``mvchern {ed,chow,mather,verify}``.

Exit codes: 0 success, 1 mismatch, 2 usage, 3 numeric instability.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .cameras import load_config
from .chow import TOP_DEGREE, build_presentation, degree, format_element, parse_element
from .errors import (
    ConfigParseError,
    DegenerateConfig,
    ExpressionParseError,
    MVChernError,
    TrackerBudgetExceeded,
    UnstableCount,
    UnsupportedN,
)
from .mather import affine_count_polynomial
from .report import EDReport, build_report, render

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

OUTPUT_DIR_ENV = "MVCHERN_OUTPUT_DIR"
MAX_N = 30


class UsageError(Exception):
    pass


def parse_range(text: str) -> Tuple[int, int]:
    """``"3"`` or ``"2..5"`` to an inclusive pair."""
    m = re.fullmatch(r"\s*(-?\d+)\s*(?:\.\.\s*(-?\d+)\s*)?", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    return lo, hi


def _check_range(lo: int, hi: int) -> None:
    if not 2 <= lo <= hi <= MAX_N:
        raise UsageError(f"need 2 <= A <= B <= {MAX_N} for --n A..B, got {lo}..{hi}")


def _single_n(rng: Tuple[int, int]) -> int:
    lo, hi = rng
    if lo != hi:
        raise UsageError("this command takes a single N")
    if lo < 2:
        raise UsageError(f"need N >= 2, got {lo}")
    return lo


def _emit(text: str, args, default_name: str) -> None:
    sys.stdout.write(text)
    target = args.output
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if target is None and out_dir:
        target = default_name
    if target is None:
        return
    path = Path(target)
    if not path.is_absolute() and out_dir:
        path = Path(out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, newline="")


def _reports(lo: int, hi: int, jobs: int) -> List[EDReport]:
    ns = list(range(lo, hi + 1))
    if jobs > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(build_report, ns))  # map keeps N order
    return [build_report(n) for n in ns]


def cmd_ed(args) -> int:
    lo, hi = args.n
    _check_range(lo, hi)
    reports = _reports(lo, hi, args.jobs)
    _emit(render(reports, args.format, args.timings), args, f"ed_{lo}-{hi}.{_ext(args.format)}")
    for r in reports:
        bad = r.first_mismatch()
        if bad:
            print(f"N={r.N}: first failing field {bad}", file=sys.stderr)
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_mather(args) -> int:
    lo, hi = args.n
    _check_range(lo, hi)
    reports = _reports(lo, hi, args.jobs)
    if args.format == "json":
        text = "".join(
            json.dumps(
                {
                    "N": r.N,
                    "euObstruction": r.eu_obstruction,
                    "selfIntersection": r.self_intersection,
                    "mather": r.mather.to_dict(),
                    "matherPrinted": r.mather_printed.to_dict(),
                    "polarDegrees": list(r.polar_degrees),
                }
            )
            + "\n"
            for r in reports
        )
    elif args.format == "csv":
        header = ["N", "euObstruction", "selfIntersection"] + [f"cM{j}" for j in range(4)]
        header += [f"cM{j}_printed" for j in range(4)] + [f"delta{k}" for k in range(4)]
        lines = [",".join(header)]
        for r in reports:
            vals = [r.N, r.eu_obstruction, r.self_intersection, *r.mather.as_tuple()]
            vals += [*r.mather_printed.as_tuple(), *r.polar_degrees]
            lines.append(",".join(str(v) for v in vals))
        text = "\r\n".join(lines) + "\r\n"
    else:
        text = "".join(
            f"N = {r.N}: Eu = {r.eu_obstruction}, E.E = {r.self_intersection}, "
            f"c^M = {r.mather.as_tuple()} (printed {r.mather_printed.as_tuple()}), "
            f"polar degrees {r.polar_degrees}\n"
            for r in reports
        )
    _emit(text, args, f"mather_{lo}-{hi}.{_ext(args.format)}")
    return EXIT_OK


def cmd_chow(args) -> int:
    N = _single_n(args.n)
    pres = build_presentation(N)
    element = parse_element(pres, args.expression)
    nf = format_element(element)
    deg = degree(pres, element) if element and element.degrees() == {TOP_DEGREE} else None
    if args.format == "json":
        text = json.dumps({"N": N, "expression": args.expression, "normalForm": nf, "degree": deg}) + "\n"
    elif args.format == "csv":
        text = "N,expression,normalForm,degree\r\n" + ",".join(
            _csv_field(str(v)) for v in (N, args.expression, nf, "" if deg is None else deg)
        ) + "\r\n"
    else:
        text = nf + "\n" + (f"deg {deg}\n" if deg is not None else "")
    _emit(text, args, f"chow_{N}.{_ext(args.format)}")
    return EXIT_OK


def _csv_field(s: str) -> str:
    if any(c in s for c in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _ext(fmt: str) -> str:
    return {"json": "jsonl", "csv": "csv"}.get(fmt, "txt")


def cmd_verify(args) -> int:
    from .mather import run_pipeline
    from .numeric.verify import (
        critical_points, degree_by_slicing, monodromy_critical_points, random_critical_instance,
    )
    from .cameras import random_config

    N = _single_n(args.n)
    config = load_config(Path(args.config).read_text()) if args.config else None
    if config is not None and config.N != N:
        raise UsageError(f"--config has {config.N} cameras but --n is {N}")
    lines = []
    if args.mode == "degree":
        if N not in (2, 3):
            raise UsageError(
                f"degree by slicing is limited to N in {{2, 3}} ({N ** 3} paths per slice "
                "and the symbolic value is authoritative beyond that); use `ed` instead"
            )
        cfg = config or random_config(N, args.seed)
        numeric = degree_by_slicing(cfg, seed=args.seed, debug_csv=args.debug_paths)
        symbolic = run_pipeline(N).pushforward.a3
        ok = numeric == symbolic
        lines.append(f"numeric {numeric} {'==' if ok else '!='} symbolic {symbolic}: {'OK' if ok else 'MISMATCH'}")
    else:
        if N != 2 and not (N == 3 and args.best_effort):
            raise UsageError("critical counts run for N = 2 (N = 3 with --best-effort)")
        expected = affine_count_polynomial(N)
        runs = args.seeds
        need = math.ceil(0.9 * runs)
        hits = 0
        for k in range(runs):
            s = args.seed + k
            cfg, u = random_critical_instance(N, s)
            if config is not None:
                cfg = config
            if N == 3:
                # total-degree paths mostly end on singular strata here; monodromy does better
                mono = monodromy_critical_points(cfg, u, seed=s, stall=8)
                cp = mono.critical
                detail = f"monodromy: {mono.generic_count} generic, {mono.loops} loops"
            else:
                cp = critical_points(cfg, u, seed=s, runs=2, debug_csv=args.debug_paths if k == 0 else None)
                r0 = cp.runs[0]
                detail = f"raw {r0.raw}, finite {r0.finite}, diverged {r0.diverged}, failed {r0.failures}"
            hits += cp.count == expected
            lines.append(f"seed {s}: {cp.count} critical points ({detail})")
        ok = hits >= need
        verdict = "OK" if ok else "MISMATCH"
        lines.append(f"{expected}/{expected} expected in ≥{need} runs: {verdict} ({hits} of {runs} runs)")
        if N == 3:
            lines.append("N = 3 is best-effort and not gating")
    text = "\n".join(lines) + "\n"
    if args.format == "json":
        text = json.dumps({"N": N, "mode": args.mode, "lines": lines, "ok": ok}) + "\n"
    _emit(text, args, f"verify_{args.mode}_{N}.{_ext(args.format)}")
    return EXIT_OK if ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvchern",
        description="ED degree of multiview varieties via Chern-Mather classes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default=None):
        p.add_argument("--n", type=parse_range, required=n_default is None, default=n_default,
                       metavar="A..B", help="N or an inclusive range A..B")
        p.add_argument("--format", choices=("json", "csv", "text"), default="text")
        p.add_argument("--output", metavar="FILE",
                       help=f"also write the report here (relative to ${OUTPUT_DIR_ENV} if set)")

    p = sub.add_parser("ed", help="ED degree report per N")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for per-N pipelines")
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds per N")
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("mather", help="Euler obstruction, Chern-Mather class and polar degrees")
    common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_mather)

    p = sub.add_parser("chow", help="normal form (and degree) of a Chow ring expression")
    common(p)
    p.add_argument("expression", help='e.g. "T_1_2^3" or "h*Q_1"')
    p.set_defaults(func=cmd_chow)

    p = sub.add_parser("verify", help="numerical cross-checks")
    common(p)
    p.add_argument("--mode", choices=("degree", "critical"), default="degree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of random instances (critical mode)")
    p.add_argument("--config", metavar="FILE", help="camera JSON instead of a seeded random configuration")
    p.add_argument("--debug-paths", metavar="FILE", help="write per-path diagnostics as CSV")
    p.add_argument("--best-effort", action="store_true", help="allow N = 3 critical counts")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, UnsupportedN, ExpressionParseError, ConfigParseError, DegenerateConfig, OSError) as exc:
        print(f"mvchern {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnstableCount, TrackerBudgetExceeded) as exc:
        print(f"mvchern {args.command}: numeric instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MVChernError as exc:
        print(f"mvchern {args.command}: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())

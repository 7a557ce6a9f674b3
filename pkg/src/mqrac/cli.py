"""Command-line front end: ``mqrac {earac,classical,qrac,diff}``.

Output is deterministic: JSON keys keep a fixed order and floats carry 12
significant digits, so identical flags give byte-identical output.  Wall time
is only included with ``--timing``.

Exit codes: 0 success, 2 usage error, 3 enumeration cap exceeded,
4 internal verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from .classical import (
    DEFAULT_CAP,
    appendix_tasks,
    optimal_report,
    zigzag_formula,
    zigzag_report,
)
from .core import (
    CapExceededError,
    RacTask,
    SuccessReport,
    UnsupportedScenarioError,
    VerificationError,
    round_sig,
)
from .earac import bell_report, closed_form_ghz, ghz_report, grid9_report
from .qrac import CONSTRUCTIONS, AssignmentSearchError, qrac_report

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4
EARAC_TOL = 1e-9


def plain(obj: Any) -> Any:
    """JSON-ready copy: Fractions become ``{num, den, float}``, floats are rounded."""
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator, "float": round_sig(float(obj))}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [plain(v) for v in obj]
    return obj


def fraction_text(value: Fraction | None) -> str:
    return "" if value is None else f"{value.numerator}/{value.denominator}"


@dataclass
class ReportBundle:
    command: str
    params: dict[str, Any]
    reports: list[tuple[str, SuccessReport]] = field(default_factory=list)
    caps: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    wall_time: float | None = None

    def add(self, label: str, report: SuccessReport):
        self.reports.append((label, report))

    def to_json(self) -> dict[str, Any]:
        out = {
            "version": __version__,
            "command": self.command,
            "params": plain(self.params),
            "caps": plain(self.caps),
            "reports": [
                {"label": label, **r.to_json(), "metadata": plain(r.metadata)}
                for label, r in self.reports
            ],
        }
        if self.extra:
            out.update(plain(self.extra))
        if self.wall_time is not None:
            out["wall_time_s"] = round(self.wall_time, 3)
        return out

    def summary_rows(self) -> list[dict[str, Any]]:
        rows = []
        for label, r in self.reports:
            row = {
                "label": label,
                "method": r.method,
                "n": r.task.n,
                "k": r.task.k,
                "value_exact": fraction_text(r.value_exact),
                "value_float": round_sig(r.value_float),
            }
            for key, val in r.metadata.items():
                if isinstance(val, Fraction):
                    row[key] = fraction_text(val)
                elif isinstance(val, (bool, int, float, str, np.floating, np.integer)):
                    row[key] = plain(val)
            rows.append(row)
        return rows

    def per_pair_rows(self) -> list[dict[str, Any]]:
        rows = []
        for label, r in self.reports:
            if r.per_pair is None:
                continue
            n = r.task.n
            for x, ps in enumerate(np.asarray(r.per_pair, dtype=float).tolist()):
                for y, p in enumerate(ps):
                    rows.append({"label": label, "x": format(x, f"0{n}b"), "y": y, "p": round_sig(p)})
        return rows


def write_csv(rows: list[dict[str, Any]]) -> str:
    fields: list[str] = []
    for row in rows:
        fields += [k for k in row if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


def render(bundle: ReportBundle, fmt: str, per_pair: bool = False) -> str:
    if fmt == "json":
        return json.dumps(bundle.to_json(), indent=2) + "\n"
    if "rows" in bundle.extra:
        return write_csv(bundle.extra["rows"])
    return write_csv(bundle.per_pair_rows() if per_pair else bundle.summary_rows())


def thread_count(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MQRAC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UnsupportedScenarioError(f"MQRAC_THREADS must be an integer, got {env!r}")
    return 1


def cmd_earac(args) -> ReportBundle:
    workers = thread_count(args)
    kw = {"per_pair": True, "workers": workers}
    if args.protocol == "bell":
        if args.n is None or args.n < 2:
            raise UnsupportedScenarioError("earac bell needs --n >= 2")
        report = bell_report(args.n, **kw)
    elif args.protocol == "ghz":
        if args.n is None or args.n < 3 or args.n % 2 == 0:
            raise UnsupportedScenarioError("earac ghz needs an odd --n >= 3 (each GHZ state joins two new inputs)")
        report = ghz_report(args.n, **kw)
    else:
        report = grid9_report(**kw)
    diff = report.metadata.get("abs_diff")
    if diff is not None and diff > EARAC_TOL:
        raise VerificationError(f"simulation and closed form differ by {diff:.3g}")
    if not args.per_pair:
        report = SuccessReport(report.task, report.method, report.value_float, metadata=report.metadata)
    bundle = ReportBundle("earac", {"protocol": args.protocol, "n": report.task.n, "threads": workers})
    bundle.add(args.protocol, report)
    return bundle


def cmd_classical(args) -> ReportBundle:
    bundle = ReportBundle("classical", {"mode": args.mode, "n": args.n, "k": args.k})
    if args.mode == "enumerate":
        if args.n is None:
            raise UnsupportedScenarioError("classical enumerate needs --n")
        bundle.caps["cap"] = args.cap
        task = RacTask.standard(args.n, args.k)
        bundle.add(f"standard({args.n},{args.k})", optimal_report(task, cap=args.cap))
    elif args.mode == "zigzag":
        if args.n is None or args.n < 2:
            raise UnsupportedScenarioError("classical zigzag needs --n >= 2")
        bundle.add(f"zigzag({args.n})", zigzag_report(args.n))
    else:
        bundle.caps["cap"] = args.cap
        for row in appendix_tasks():
            report = optimal_report(row.task, cap=args.cap)
            report.metadata["expected"] = row.expected
            report.metadata["matches_expected"] = report.value_exact == row.expected
            bundle.add(row.label, report)
    return bundle


def cmd_qrac(args) -> ReportBundle:
    bundle = ReportBundle("qrac", {"construction": args.construction})
    bundle.caps["cap"] = args.cap
    report = qrac_report(args.construction, cap=args.cap)
    bundle.add(args.construction, report)
    con = CONSTRUCTIONS[args.construction]()
    if args.emit_remap:
        bundle.extra["remap"] = con.remap.to_json()
    if args.emit_encoding:
        bundle.extra["encoding"] = con.to_json()
    return bundle


def diff_rows(max_n: int) -> list[dict[str, Any]]:
    rows = []
    for n in range(3, max_n + 1):
        pq = closed_form_ghz(n, extrapolate=True)
        pc = zigzag_formula(n)
        rows.append({
            "n": n,
            "p_q_ghz": round_sig(pq),
            "p_c": round_sig(float(pc)),
            "p_c_exact": fraction_text(pc),
            "diff": round_sig(pq - float(pc)),
            "extrapolated": n % 2 == 0,
        })
    return rows


def cmd_diff(args) -> ReportBundle:
    if args.max_n < 3:
        raise UnsupportedScenarioError("diff needs --max-n >= 3")
    rows = diff_rows(args.max_n)
    best = max(rows, key=lambda r: r["diff"])
    bundle = ReportBundle("diff", {"max_n": args.max_n})
    bundle.extra["rows"] = rows
    bundle.extra["argmax_n"] = best["n"]
    bundle.extra["max_diff"] = best["diff"]
    return bundle


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default json; csv for diff)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (fallback: MQRAC_THREADS, else 1)")
    common.add_argument("--timing", action="store_true", help="include wall time in JSON output")

    p = argparse.ArgumentParser(prog="mqrac", description="Multiparty random access code calculator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("earac", parents=[common], help="entanglement-assisted concatenation protocols")
    e.add_argument("protocol", choices=("bell", "ghz", "grid9"))
    e.add_argument("--n", type=int, help="number of input bits (ignored by grid9)")
    e.add_argument("--per-pair", action="store_true", help="include the per-(x, y) success table")
    e.set_defaults(func=cmd_earac)

    c = sub.add_parser("classical", parents=[common], help="classical strategies")
    c.add_argument("mode", choices=("enumerate", "zigzag", "appendix"))
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int, default=2, help="bits held by the first party (enumerate)")
    c.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration budget")
    c.set_defaults(func=cmd_classical)

    q = sub.add_parser("qrac", parents=[common], help="polyhedral multiparty QRACs")
    q.add_argument("construction", choices=tuple(CONSTRUCTIONS))
    q.add_argument("--emit-remap", action="store_true", help="include the x -> x' table")
    q.add_argument("--emit-encoding", action="store_true", help="include unitaries and initial states")
    q.add_argument("--cap", type=int, default=DEFAULT_CAP, help="classical enumeration budget")
    q.set_defaults(func=cmd_qrac)

    d = sub.add_parser("diff", parents=[common], help="GHZ chain minus classical optimum, by n")
    d.add_argument("--max-n", type=int, default=20)
    d.set_defaults(func=cmd_diff)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        parser.print_usage(sys.stderr)
        print("mqrac: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("csv" if args.command == "diff" else "json")
    start = time.perf_counter()
    try:
        bundle = args.func(args)
    except CapExceededError as exc:
        print(f"mqrac: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (VerificationError, AssignmentSearchError) as exc:
        print(f"mqrac: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UnsupportedScenarioError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"mqrac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timing:
        bundle.wall_time = time.perf_counter() - start
    sys.stdout.write(render(bundle, fmt, per_pair=getattr(args, "per_pair", False)))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit status: 0 on success, 1 when ``verify`` finds a violation, 2 on invalid
input, 3 when a computation exceeds its budget.  Output never contains
timestamps unless ``--timing`` is given, so identical invocations produce
identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional, Sequence

from . import covering, expsums, moments, verify
from .errors import BudgetExceeded, NotCoprime
from .modarith import factorize

MOMENT_COLUMNS = ["q", "c", "t", "L1", "L2", "k", "method", "S", "main_kind", "bound", "ratio", "elapsed_ms"]
BADBOX_COLUMNS = ["q", "c", "t", "L", "bad_count", "total", "fraction", "elapsed_ms"]

# --budget names and the library keyword they feed
BUDGETS = {
    "grid": moments.GRID_BUDGET,
    "pairs": moments.PAIRS_BUDGET,
    "spectral": moments.SPECTRAL_BUDGET,
    "spectral_t": moments.SPECTRAL_T_BUDGET,
    "scan": moments.SCAN_BUDGET,
    "hyper": expsums.HYPER_BUDGET,
    "covering": covering.GRID_BUDGET,
}


class UsageError(ValueError):
    pass


def _fmt(v: Any) -> Any:
    if isinstance(v, float):
        return float(f"{v:.12g}")
    return v


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit(rows: list[dict], fmt: str, columns: Optional[Sequence[str]] = None, single: bool = False) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    if fmt == "json":
        data = [{k: _fmt(r.get(k)) for k in r} for r in rows]
        return json.dumps(data[0] if single and data else data, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(k)) for k in columns])
        return buf.getvalue()
    cells = [columns] + [[_cell(r.get(k)) for k in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "".join("  ".join(s.rjust(w) for s, w in zip(row, widths)).rstrip() + "\n" for row in cells)


def _parse_budgets(items: Sequence[str]) -> dict[str, int]:
    out = dict(BUDGETS)
    for item in items:
        name, _, value = item.partition("=")
        if name not in BUDGETS or not value:
            raise UsageError(f"unknown budget {item!r}; names: {', '.join(sorted(BUDGETS))}")
        try:
            out[name] = int(float(value))
        except ValueError:
            raise UsageError(f"budget {name} needs an integer value") from None
    return out


def _check_q(q: int) -> None:
    if q < 1:
        raise UsageError("q must be a positive integer")


def _moment_row(rep: moments.MomentReport, elapsed_ms: Optional[float] = None) -> dict:
    return {
        "q": rep.q,
        "c": rep.c,
        "t": rep.t,
        "L1": rep.lengths[0],
        "L2": rep.lengths[1] if len(rep.lengths) > 1 else rep.lengths[0],
        "k": rep.k,
        "method": rep.method,
        "S": rep.moment_value,
        "main_kind": rep.main_term_kind,
        "bound": rep.bound_value,
        "ratio": rep.ratio,
        "elapsed_ms": elapsed_ms,
    }


def _moment_json(rep: moments.MomentReport) -> dict:
    row: dict[str, Any] = {"q": rep.q, "c": rep.c}
    if rep.t > 2:
        row["t"] = rep.t
    if len(set(rep.lengths)) == 1:
        row["L"] = rep.lengths[0]
    else:
        row["L1"], row["L2"] = rep.lengths
    if rep.k != 2:
        row["k"] = rep.k
    row["method"] = rep.method
    row["S"] = rep.moment_value
    if rep.exact is not None:
        row["S_exact"] = str(rep.exact)
    row["main_term_kind"] = rep.main_term_kind
    row["bound_kind"] = rep.bound_kind
    row["bound"] = rep.bound_value
    row["ratio"] = rep.ratio
    return row


# ---------------------------------------------------------------------------
# commands


def cmd_kloosterman(args, budgets) -> str:
    _check_q(args.q)
    v = expsums.kloosterman(args.a, args.b, args.q)
    row = {"a": args.a, "b": args.b, "q": args.q, "re": v.value.real, "im": v.value.imag,
           "bound": v.bound, "within_bound": v.within_bound}
    return emit([row], args.format, single=True)


def cmd_hyperkloosterman(args, budgets) -> str:
    _check_q(args.q)
    v = expsums.hyper_kloosterman(args.ks, args.c, args.q, limit=budgets["hyper"])
    row = {"ks": " ".join(map(str, args.ks)), "c": args.c, "q": args.q, "re": v.value.real,
           "im": v.value.imag, "abs": abs(v.value), "bound": v.bound, "within_bound": v.within_bound}
    return emit([row], args.format, single=True)


def _lengths(args) -> tuple[int, int]:
    L1 = args.L1 if args.L1 is not None else args.L
    L2 = args.L2 if args.L2 is not None else args.L
    if L1 is None or L2 is None:
        raise UsageError("give --L or both --L1 and --L2")
    return L1, L2


def _moment2(q, c, L1, L2, method, budgets) -> moments.MomentReport:
    if method == "prefix":
        return moments.second_moment_prefix(q, c, L1, L2, limit=budgets["grid"])
    if method == "pairs":
        return moments.second_moment_pairs(q, c, L1, L2, limit=budgets["pairs"])
    if L1 != L2:
        raise UsageError("the spectral method needs L1 == L2")
    return moments.second_moment_spectral(q, c, L1, limit=budgets["spectral"])


def cmd_moment2(args, budgets) -> str:
    _check_q(args.q)
    L1, L2 = _lengths(args)
    rep = _moment2(args.q, args.c, L1, L2, args.method, budgets)
    if args.format == "json":
        return emit([_moment_json(rep)], "json", single=True)
    return emit([_moment_row(rep)], args.format, MOMENT_COLUMNS[:-1])


def cmd_momentk(args, budgets) -> str:
    _check_q(args.q)
    rep = moments.kth_moment(args.q, args.c, args.L, args.k, args.shape, limit=budgets["grid"])
    if args.format == "json":
        return emit([_moment_json(rep)], "json", single=True)
    return emit([_moment_row(rep)], args.format, MOMENT_COLUMNS[:-1])


def cmd_momentt(args, budgets) -> str:
    _check_q(args.q)
    if args.method == "spectral":
        rep = moments.second_moment_spectral_t(args.q, args.c, args.L, args.t, limit=budgets["spectral_t"])
    else:
        rep = moments.second_moment_prefix_t(args.q, args.c, args.L, args.t, limit=budgets["scan"])
    if args.format == "json":
        return emit([_moment_json(rep)], "json", single=True)
    return emit([_moment_row(rep)], args.format, MOMENT_COLUMNS[:-1])


def _badbox_row(rep: moments.BadBoxReport, elapsed_ms=None) -> dict:
    return {"q": rep.q, "c": rep.c, "t": rep.t, "L": rep.L, "bad_count": rep.bad_count,
            "total": rep.total, "fraction": rep.fraction, "elapsed_ms": elapsed_ms}


def cmd_badboxes(args, budgets) -> str:
    _check_q(args.q)
    limit = budgets["grid"] if args.t == 2 else budgets["scan"]
    rep = moments.bad_boxes(args.q, args.c, args.L, args.t, sample_size=args.sample, limit=limit)
    row = _badbox_row(rep)
    del row["elapsed_ms"]
    if args.format == "json":
        row["sample"] = [list(s) for s in rep.sample]
        return emit([row], "json", single=True)
    return emit([row], args.format)


def cmd_covering(args, budgets) -> str:
    if args.q < 2:
        raise UsageError("covering needs q >= 2")
    step = args.grid_step
    if args.divisions is not None:
        if args.divisions < 1:
            raise UsageError("--divisions must be positive")
        step = Fraction(args.q, args.divisions)
    rep = covering.r_tilde(args.q, args.theta, step, torus=args.torus, limit=budgets["covering"])
    row = {
        "q": rep.q,
        "divisions": rep.divisions,
        "grid_step": rep.grid_step,
        "r_max": rep.r_max,
        "error_bound": rep.error_bound,
        "theta": rep.theta,
        "r_tilde": rep.r_tilde_estimate,
        "radius_envelope": rep.q**0.75 * math.log(rep.q),
        "torus": rep.torus,
    }
    if args.format == "json":
        row["curve"] = [[_fmt(r), _fmt(f)] for r, f in rep.curve]
        return emit([row], "json", single=True)
    return emit([row], args.format)


def _q_values(args) -> list[int]:
    qs = range(args.q_min, args.q_max + 1)
    if args.primes_only:
        return [q for q in qs if q >= 2 and factorize(q).is_prime]
    return list(qs)


def _sweep_length(q: int, args) -> int:
    if args.L is not None:
        return min(args.L, q)
    return min(q, math.ceil(q**args.L_exp))


def _timed(fn: Callable, timing: bool):
    start = time.perf_counter()
    out = fn()
    return out, (round((time.perf_counter() - start) * 1000, 3) if timing else None)


def cmd_sweep(args, budgets) -> str:
    if args.L is None and args.L_exp is None:
        raise UsageError("sweep needs --L or --L-exp")
    if args.q_min < 1:
        raise UsageError("q must be a positive integer")
    points = []
    for q in _q_values(args):
        for c in args.c:
            if math.gcd(c, q) != 1:
                continue
            L = _sweep_length(q, args)
            if args.kind == "moment":
                for k in sorted(set(args.k)):
                    points.append((q, c % q if q > 1 else c, L, k))
            else:
                points.append((q, c % q if q > 1 else c, L, None))

    def one(point):
        q, c, L, k = point
        if args.kind == "badboxes":
            limit = budgets["grid"] if args.t == 2 else budgets["scan"]
            rep, ms = _timed(lambda: moments.bad_boxes(q, c, L, args.t, sample_size=0, limit=limit), args.timing)
            return _badbox_row(rep, ms)
        if k == 2 and args.method != "prefix":
            rep, ms = _timed(lambda: _moment2(q, c, L, L, args.method, budgets), args.timing)
        else:
            rep, ms = _timed(lambda: moments.kth_moment(q, c, L, k, args.shape, limit=budgets["grid"]), args.timing)
        return _moment_row(rep, ms)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(p) for p in points]
    columns = MOMENT_COLUMNS if args.kind == "moment" else BADBOX_COLUMNS
    return emit(rows, args.format, columns)


def cmd_verify(args, budgets) -> str:
    results = verify.run_all(args.max_q, threads=args.threads)
    rows = [{"check": r.name, "cases": r.cases, "violations": r.violations, "worst": r.worst,
             "status": "pass" if r.ok else "FAIL"} for r in results]
    args._verify_failed = any(not r.ok for r in results)
    return emit(rows, args.format)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json", "table"], help="default: csv for sweep, table otherwise")
    common.add_argument("--threads", type=int, default=1, help="worker threads for scans (output is identical)")
    common.add_argument("--budget", action="append", default=[], metavar="NAME=VALUE",
                        help=f"override a work limit; names: {', '.join(sorted(BUDGETS))}")
    common.add_argument("--output", help="write to this file instead of stdout")

    p = argparse.ArgumentParser(prog="kloosbox", description="Congruences in short intervals via Kloosterman sums.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("kloosterman", parents=[common], help="evaluate S(a, b; q)")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.set_defaults(func=cmd_kloosterman)

    s = sub.add_parser("hyperkloosterman", parents=[common], help="evaluate a hyper-Kloosterman sum")
    s.add_argument("--ks", type=int, nargs="+", required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.set_defaults(func=cmd_hyperkloosterman)

    def moment_args(s):
        s.add_argument("--q", type=int, required=True)
        s.add_argument("--c", type=int, required=True)

    s = sub.add_parser("moment2", parents=[common], help="second moment, two variables")
    moment_args(s)
    s.add_argument("--L", type=int)
    s.add_argument("--L1", type=int)
    s.add_argument("--L2", type=int)
    s.add_argument("--method", choices=["prefix", "pairs", "spectral"], default="prefix")
    s.set_defaults(func=cmd_moment2)

    s = sub.add_parser("momentk", parents=[common], help="k-th moment, two variables")
    moment_args(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--shape", choices=["thm1", "thm3"], default="thm1")
    s.set_defaults(func=cmd_momentk)

    s = sub.add_parser("momentt", parents=[common], help="second moment, t variables, all units")
    moment_args(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--t", type=int, default=3)
    s.add_argument("--method", choices=["prefix", "spectral"], default="prefix")
    s.set_defaults(func=cmd_momentt)

    s = sub.add_parser("badboxes", parents=[common], help="count boxes without solutions")
    moment_args(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--t", type=int, default=2)
    s.add_argument("--sample", type=int, default=16)
    s.set_defaults(func=cmd_badboxes)

    s = sub.add_parser("covering", parents=[common], help="covering radius of xy = 1 (mod q)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--grid-step", type=float)
    s.add_argument("--divisions", type=int, help="grid cells per side (step = q / divisions)")
    s.add_argument("--theta", type=float, default=0.99)
    s.add_argument("--torus", action="store_true", help="exploratory: wrap distances around the torus")
    s.set_defaults(func=cmd_covering)

    s = sub.add_parser("sweep", parents=[common], help="CSV sweep over moduli")
    s.add_argument("kind", choices=["moment", "badboxes"])
    s.add_argument("--q-min", type=int, required=True)
    s.add_argument("--q-max", type=int, required=True)
    s.add_argument("--primes-only", action="store_true")
    s.add_argument("--c", type=int, nargs="+", default=[1])
    s.add_argument("--L", type=int)
    s.add_argument("--L-exp", type=float, help="use L = ceil(q ** L_EXP)")
    s.add_argument("--k", type=int, nargs="+", default=[2])
    s.add_argument("--t", type=int, default=2)
    s.add_argument("--method", choices=["prefix", "pairs", "spectral"], default="prefix")
    s.add_argument("--shape", choices=["thm1", "thm3"], default="thm1")
    s.add_argument("--timing", action="store_true", help="fill elapsed_ms (makes output non-reproducible)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", parents=[common], help="run the identity and bound suite")
    s.add_argument("--max-q", type=int, default=50)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "table"
    try:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        budgets = _parse_budgets(args.budget)
        text = args.func(args, budgets)
    except (UsageError, NotCoprime, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if getattr(args, "_verify_failed", False) else 0


if __name__ == "__main__":
    sys.exit(main())

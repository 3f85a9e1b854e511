"""Command-line front end: ``dicfb capacity | simulate | sweep | curve | verify``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from .capacity import (fb_sum_capacity, feedback_gain, half_duplex_sum_capacity,
                       in_no_gain_region, no_fb_sum_capacity)
from .channel import OperatingPoint, Variant, topology_from_name
from .oracle.allocations import (MAX_Q_BLOCK1, SearchGuardError, parse_cache,
                                 verify_w_curve)
from .sessions import (STRATEGIES, RegimeError, decode_check,
                       feedback_session, half_duplex_session, sweep_t)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt6(x) -> str:
    """Exact rational rendered with six decimals (round half to even)."""
    x = Fraction(x)
    scaled = round(x * 10**6)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // 10**6}.{scaled % 10**6:06d}"


def _point(n, m) -> OperatingPoint:
    try:
        return OperatingPoint(n, m)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _int_range(text: str) -> list:
    """``"3"`` or ``"1-6"`` (inclusive)."""
    try:
        if "-" in text:
            lo, hi = (int(t) for t in text.split("-", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A-B, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return list(range(lo, hi + 1))


def _int_list(text: str) -> list:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def _config_line(args) -> str:
    # Thread count and output path never change the results.
    skip = {"func", "threads", "output"}
    parts = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip]
    return "# config: " + " ".join(parts)


def _emit(args, header, rows, out):
    buf = io.StringIO()
    buf.write(_config_line(args) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        out.write(text)


# --- capacity ----------------------------------------------------------------------

def cmd_capacity(args, out):
    op = _point(args.n, args.m)
    rows = []
    if op.n > 0:
        rows.append(["no-feedback", str(no_fb_sum_capacity(op)), "exact"])
    else:
        rows.append(["no-feedback", "undefined", "n=0"])
    for v in (Variant.ONE_LINK, Variant.TWO_LINK, Variant.FOUR_LINK):
        rows.append([v.value, str(fb_sum_capacity(op, v)), "exact"])
    if op.n > 0:
        hd = half_duplex_sum_capacity(op)
        rows.append(["half-duplex", str(hd), hd.bound_kind])
        gain = feedback_gain(op)
        rows.append(["gain", str(gain), "none" if gain == 0 else "positive"])
    else:
        rows.append(["half-duplex", "undefined", "n=0"])
        rows.append(["gain", "undefined", "n=0"])
    _emit(args, ["model", "sum_capacity", "kind"], rows, out)
    return EXIT_OK


# --- simulate ----------------------------------------------------------------------

SIM_HEADER = ["n", "m", "alpha", "model", "T", "t", "bits_u1", "bits_u2", "sum_rate", "capacity"]


def run_simulation(args):
    op = _point(args.n, args.m)
    if args.topology == "half-duplex":
        if args.L is None or args.f is None:
            raise UsageError("half-duplex needs --L and --f")
        strategy = args.strategy or ("no-feedback" if args.f == args.L else None)
        if strategy is None:
            raise UsageError("half-duplex with f < L needs --strategy")
        trace, rep = half_duplex_session(op, args.L, args.f, args.T, strategy, args.seed)
    else:
        if args.L is not None or args.f is not None or args.strategy is not None:
            raise UsageError("--L, --f and --strategy apply to half-duplex only")
        topo = topology_from_name(args.topology)
        trace, rep = feedback_session(op, args.T, args.seed, topo)
    return op, trace, rep


def cmd_simulate(args, out):
    try:
        op, trace, rep = run_simulation(args)
    except RegimeError as exc:
        raise UsageError(f"regime mismatch: {exc}") from None
    if args.trace:
        Path(args.trace).write_text(trace.export())
    check = decode_check(trace)
    row = [op.n, op.m, fmt6(op.alpha) if op.n else "",
           args.topology, args.T, fmt6(trace.topology.t), rep.delivered_u1,
           rep.delivered_u2, fmt6(rep.finite_sum_rate), str(rep.formula_capacity)]
    _emit(args, SIM_HEADER, [row], out)
    if not check.ok:
        for f in check.failures[:10]:
            print(f"decode_check: {f}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- sweep -------------------------------------------------------------------------

SWEEP_HEADER = ["n", "m", "L", "f", "t", "strategy", "sum_rate", "best"]


def cmd_sweep(args, out):
    cells = []
    for n in args.n:
        for m in args.m:
            op = _point(n, m)
            if op.n == 0:
                raise UsageError("half-duplex sweep needs n > 0")
            for L in args.L:
                cells.append((op, L))

    def run(cell):
        op, L = cell
        return op, L, sweep_t(op, L, args.frames, args.seed)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    rows = []
    for op, L, res in results:
        best = res.best
        for f, s, rate in res.rows:
            rows.append([op.n, op.m, L, f, fmt6(Fraction(f, L)), s, fmt6(rate),
                         int((f, s) == best[:2])])
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], STRATEGIES.index(r[5])))
    _emit(args, SWEEP_HEADER, rows, out)
    return EXIT_OK


# --- curve -------------------------------------------------------------------------

def cmd_curve(args, out):
    n = args.n
    if not 1 <= n <= 60:
        raise UsageError("--n must lie in 1..60 so every alpha on the grid is m/n")
    m_max = args.m_max if args.m_max is not None else 3 * n
    rows = []
    for m in range(m_max + 1):
        op = OperatingPoint(n, m)
        fb = fb_sum_capacity(op).bits_per_forward_slot / (2 * n)
        nf = no_fb_sum_capacity(op).bits_per_forward_slot / (2 * n)
        rows.append([fmt6(op.alpha), fmt6(fb), fmt6(nf)])
    _emit(args, ["alpha", "feedback", "no_feedback"], rows, out)
    return EXIT_OK


# --- verify ------------------------------------------------------------------------

def _suite_formulas(args):
    bad = [(n, m) for n in range(65) for m in range(65) if n + m
           and fb_sum_capacity(OperatingPoint(n, m)).lower != max(2 * n - m, m)]
    bad += [(n, m) for n in range(1, 33) for m in range(65)
            if (feedback_gain(OperatingPoint(n, m)) == 0)
            != (in_no_gain_region(OperatingPoint(n, m)) or m == 0)]
    return [f"formula mismatch at n={n} m={m}" for n, m in bad]


def _suite_w_curve(args):
    cache = None
    if args.cache:
        cache = parse_cache(Path(args.cache).read_text())
    grid = [OperatingPoint(n, m) for n in range(1, args.n_max + 1)
            for m in range(args.m_max + 1)]
    rep = verify_w_curve(grid, cache)
    return [l for l in rep.lines() if not l.startswith("ok")]


def _suite_sessions(args):
    errs = []
    for n in range(1, args.n_max + 1):
        for m in range(args.m_max + 1):
            op = OperatingPoint(n, m)
            trace, rep = feedback_session(op, 20, args.seed)
            check = decode_check(trace)
            if not check.ok:
                errs.append(f"n={n} m={m}: {check.failures[0]}")
            if rep.finite_sum_rate > rep.formula_capacity.upper:
                errs.append(f"n={n} m={m}: rate {rep.finite_sum_rate} above capacity")
    return errs


def _suite_half_duplex(args):
    errs = []
    for n in range(1, args.n_max + 1):
        for m in range(args.m_max + 1):
            op = OperatingPoint(n, m)
            if 3 * m < 2 * n:
                continue
            for L in (2, 3, 6):
                f, s, rate = sweep_t(op, L, 4, args.seed).best
                if f != L or rate != no_fb_sum_capacity(op).bits_per_forward_slot:
                    errs.append(f"n={n} m={m} L={L}: best f={f} {s} rate={rate}")
    return errs


def _suite_strategies(args):
    from .oracle.strategies import exhaustive_feedback_search, tiny_instances
    errs = []
    for space in tiny_instances():
        res = exhaustive_feedback_search(space)
        if not res.within_capacity:
            errs.append(f"converse violated: {res}")
    return errs


def cmd_verify(args, out):
    if max(args.n_max, args.m_max) > MAX_Q_BLOCK1:
        raise SearchGuardError(
            f"grid n<={args.n_max}, m<={args.m_max} exceeds the search guard q <= {MAX_Q_BLOCK1}")
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    suites = [("formulas", _suite_formulas), ("w-curve", _suite_w_curve),
              ("sessions", _suite_sessions), ("half-duplex", _suite_half_duplex)]
    if not args.skip_strategies:
        suites.append(("strategies", _suite_strategies))
    failed = False
    out.write(_config_line(args) + "\n")
    for name, fn in suites:
        errs = fn(args)
        out.write(f"{'PASS' if not errs else 'FAIL'} {name}\n")
        for e in errs:
            out.write(f"  {e}\n")
        failed |= bool(errs)
    return EXIT_FAIL if failed else EXIT_OK


# --- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dicfb", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", help="sum capacities and feedback gain at (n, m)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--output")
    c.set_defaults(func=cmd_capacity)

    s = sub.add_parser("simulate", help="run one session and report delivered bits")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--topology", default="one-link", choices=[v.value for v in Variant])
    s.add_argument("--T", type=int, default=10,
                   help="forward slots, or frames for half-duplex")
    s.add_argument("--L", type=int)
    s.add_argument("--f", type=int)
    s.add_argument("--strategy", choices=STRATEGIES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", help="write the slot trace to this file")
    s.add_argument("--output")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="half-duplex sweep over forward slots per frame")
    w.add_argument("--n", type=_int_range, required=True)
    w.add_argument("--m", type=_int_range, required=True)
    w.add_argument("--L", type=_int_list, default=[6])
    w.add_argument("--frames", type=int, default=10)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--threads", type=int, default=1)
    w.add_argument("--output")
    w.set_defaults(func=cmd_sweep)

    k = sub.add_parser("curve", help="normalized sum capacity C/(2n) against alpha")
    k.add_argument("--n", type=int, default=12)
    k.add_argument("--m-max", type=int)
    k.add_argument("--output")
    k.set_defaults(func=cmd_curve)

    v = sub.add_parser("verify", help="run the invariant suites and oracle gates")
    v.add_argument("--n-max", type=int, default=4)
    v.add_argument("--m-max", type=int, default=8)
    v.add_argument("--cache", help="allocation cache file to certify instead of searching")
    v.add_argument("--skip-strategies", action="store_true",
                   help="omit the exhaustive feedback-strategy search")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "T", 1) is not None and getattr(args, "T", 1) < 1:
        print("error: --T must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "threads", 1) < 1 or getattr(args, "frames", 1) < 1:
        print("error: --threads and --frames must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, SearchGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

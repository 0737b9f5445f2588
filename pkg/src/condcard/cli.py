"""Command-line interface: ``condcard {encode,check-gac,count,mine,bench}``.

Exit codes: 0 success, 1 I/O error, 2 usage error, 3 a property check failed.
"""
from __future__ import annotations

import argparse
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import write_dimacs
from .encoders import (ConstraintSpec, EncodingError, EncodingFlavor, Family, Kind, Mode,
                       encode, family_supports)
from .gac import (DEFAULT_CAP, SemanticOracle, TooLarge, check_gac, compare_flavors,
                  format_table, projected_model_count)
from .miner import (DbParseError, MineMode, MiningError, MiningParams, TransactionDb, load_db,
                    mine_oracle, random_db, run_mining)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_fraction(text: str) -> Fraction:
    """``A/B``, a decimal, or ``P%``."""
    text = text.strip()
    try:
        if text.endswith("%"):
            return Fraction(text[:-1]) / 100
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from None


# -- encode / check-gac / count ------------------------------------------------

def _constraint_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--kind", choices=["amk", "alk", "amo", "exactly-one"], required=required)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--cond", action="store_true", help="guard the constraint with a condition y")
    p.add_argument("--family", choices=[f.value for f in Family], default="seqcounter")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None,
                   help="default: gac with --cond, plain otherwise")


def _spec_and_flavor(args) -> tuple[ConstraintSpec, EncodingFlavor]:
    kind = {"amk": Kind.AT_MOST, "alk": Kind.AT_LEAST, "amo": Kind.AT_MOST,
            "exactly-one": Kind.EXACTLY_ONE}[args.kind]
    if args.kind == "amo":
        if args.k not in (None, 1):
            raise UsageError("--kind amo fixes k=1")
        k = 1
    elif args.kind == "exactly-one":
        k = 1
    else:
        if args.k is None:
            raise UsageError(f"--kind {args.kind} needs --k")
        k = args.k
    mode = args.mode or ("gac" if args.cond else "plain")
    try:
        spec = ConstraintSpec(kind, args.n, k, args.cond)
        flavor = EncodingFlavor(Family(args.family), Mode(mode))
    except EncodingError as e:
        raise UsageError(str(e)) from None
    return spec, flavor


def _encode(args):
    spec, flavor = _spec_and_flavor(args)
    try:
        return encode(spec, flavor)
    except EncodingError as e:
        raise UsageError(str(e)) from None


def cmd_encode(args) -> int:
    art = _encode(args)
    if args.output in (None, "-"):
        write_dimacs(art.cnf, sys.stdout)
    else:
        with open(args.output, "w") as fh:
            write_dimacs(art.cnf, fh)
    return EXIT_OK


def _all_flavor_rows(max_n: int, cap: int):
    rows = []
    for fam in (Family.PAIRWISE, Family.SEQCOUNTER, Family.SORTNET, Family.PIGEONHOLE):
        kind = Kind.AT_LEAST if fam is Family.PIGEONHOLE else Kind.AT_MOST
        for n in range(2, max_n + 1):
            for k in range(1, n):
                spec = ConstraintSpec(kind, n, k, conditional=True)
                if not family_supports(spec, fam):
                    continue
                rows += compare_flavors(spec, [EncodingFlavor(fam, Mode.NAIVE),
                                               EncodingFlavor(fam, Mode.GAC)], cap)
    return rows


def cmd_check_gac(args) -> int:
    if args.all:
        rows = _all_flavor_rows(args.max_n, max(args.cap, args.max_n))
        print(format_table(rows))
        bad = [r for r in rows if r.flavor.mode is not Mode.NAIVE and not r.report.passed]
        return EXIT_FAIL if bad else EXIT_OK
    if args.kind is None or args.n is None:
        raise UsageError("check-gac needs --kind and --n, or --all")
    art = _encode(args)
    try:
        report = check_gac(art, args.cap)
    except TooLarge as e:
        raise UsageError(str(e)) from None
    print(f"{art.spec} [{args.family}/{args.mode or ('gac' if args.cond else 'plain')}]: "
          f"{report.verdict} ({report.checked_assignments} assignments, "
          f"{report.total_counterexamples} counterexamples)")
    for c in report.counterexamples[:args.show]:
        print("  " + c.describe(art.names))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_count(args) -> int:
    art = _encode(args)
    try:
        got = projected_model_count(art, args.cap)
    except TooLarge as e:
        raise UsageError(str(e)) from None
    want = SemanticOracle(art.spec).count()
    print(f"projected models: {got}")
    print(f"oracle models: {want}")
    return EXIT_OK if got == want else EXIT_FAIL


# -- mine ----------------------------------------------------------------------

def _load(path: str) -> TransactionDb:
    with open(path) as fh:
        return load_db(fh)


def cmd_mine(args) -> int:
    db = _load(args.data)
    try:
        params = MiningParams(args.minsupp, args.minconf, MineMode(args.mode), Mode(args.amo))
    except MiningError as e:
        raise UsageError(str(e)) from None
    run = run_mining(db, params, max_time=args.timeout)
    for r in run.rules:
        print(r.format(db))
    if run.status != "complete":
        print(f"incomplete: {run.status} after {len(run.rules)} rules", file=sys.stderr)
        return EXIT_FAIL
    if args.stats:
        s = run.stats
        print(f"# rules={len(run.rules)} decisions={s.decisions} propagations={s.propagations} "
              f"conflicts={s.conflicts} time={s.elapsed:.3f}s", file=sys.stderr)
    if args.check_oracle:
        try:
            want = mine_oracle(db, params)
        except MiningError as e:
            raise UsageError(str(e)) from None
        if {r.key() for r in want} == {r.key() for r in run.rules}:
            print(f"OK: {len(want)} rules match oracle")
        else:
            print(f"MISMATCH: oracle has {len(want)} rules, solver found {len(run.rules)}")
            return EXIT_FAIL
    return EXIT_OK


# -- bench ---------------------------------------------------------------------

@dataclass
class BenchResult:
    db: str
    minsupp: Fraction
    minconf: Fraction
    flavor: str
    solved: bool
    time_ms: float
    decisions: int
    propagations: int
    rules: int

    def line(self) -> str:
        return (f"{self.db},{_pct(self.minsupp)},{_pct(self.minconf)},{self.flavor},"
                f"{int(self.solved)},{self.time_ms:.1f},{self.decisions},{self.propagations}")


def _pct(f: Fraction) -> str:
    v = f * 100
    return f"{v.numerator}%" if v.denominator == 1 else f"{float(v):.2f}%"


def grid(step: int) -> list[Fraction]:
    if not 1 <= step <= 100:
        raise UsageError("--grid-step must be in 1..100")
    points = [Fraction(p, 100) for p in range(step, 101, step)]
    if points[-1] != 1:
        points.append(Fraction(1))
    return points


def bench_config(name: str, db: TransactionDb, minsupp: Fraction, minconf: Fraction,
                 flavor: Mode, timeout: Optional[float]) -> BenchResult:
    params = MiningParams(minsupp, minconf, MineMode.MNR, flavor)
    t0 = time.perf_counter()
    run = run_mining(db, params, max_time=timeout)
    ms = (time.perf_counter() - t0) * 1000
    return BenchResult(name, minsupp, minconf, flavor.value, run.status == "complete", ms,
                       run.stats.decisions, run.stats.propagations, len(run.rules))


def run_bench(dbs: Sequence[tuple[str, TransactionDb]], step: int, flavors: Sequence[Mode],
              timeout: Optional[float], workers: int = 4) -> list[BenchResult]:
    jobs = [(name, db, s, c, fl) for name, db in dbs for s in grid(step) for c in grid(step)
            for fl in flavors]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(bench_config, *j, timeout) for j in jobs]
        return [f.result() for f in futures]


def summary_table(results: Sequence[BenchResult], flavors: Sequence[Mode], timeout) -> str:
    names = list(dict.fromkeys(r.db for r in results))
    header = ["db"]
    for fl in flavors:
        header += [f"#S({fl.value})", f"avg.time({fl.value})"]
    rows = [header]

    def cells(rs):
        out = []
        for fl in flavors:
            sel = [r for r in rs if r.flavor == fl.value]
            # unsolved configurations count at the timeout, as in the usual #S/avg-time tables
            times = [r.time_ms / 1000 if r.solved or timeout is None else timeout for r in sel]
            out += [str(sum(r.solved for r in sel)), f"{sum(times) / max(len(times), 1):.3f}"]
        return out

    for name in names:
        rows.append([name] + cells([r for r in results if r.db == name]))
    rows.append(["Total"] + cells(results))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def cmd_bench(args) -> int:
    dbs = [(path, _load(path)) for path in args.data]
    rng = random.Random(args.seed)
    for i in range(args.synthetic):
        dbs.append((f"synth{i}", random_db(args.items, args.transactions, args.density, rng)))
    if not dbs:
        raise UsageError("bench needs --data or --synthetic")
    flavors = [Mode.GAC, Mode.NAIVE] if args.amo == "both" else [Mode(args.amo)]
    results = run_bench(dbs, args.grid_step, flavors, args.timeout, args.workers)
    if args.format in ("table", "both"):
        print(summary_table(results, flavors, args.timeout))
    if args.format in ("lines", "both"):
        if args.format == "both":
            print()
        for r in results:
            print(r.line())
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="condcard", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write a constraint encoding as DIMACS")
    _constraint_args(p)
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("check-gac", help="exhaustive propagation-completeness check")
    _constraint_args(p, required=False)
    p.add_argument("--all", action="store_true", help="check the naive/gac matrix for every family")
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--show", type=int, default=5, help="counterexamples to print")
    p.set_defaults(func=cmd_check_gac)

    p = sub.add_parser("count", help="projected model count against the oracle")
    _constraint_args(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("mine", help="mine association rules from a transaction file")
    p.add_argument("--data", required=True)
    p.add_argument("--minsupp", type=parse_fraction, required=True)
    p.add_argument("--minconf", type=parse_fraction, required=True)
    p.add_argument("--mode", choices=[m.value for m in MineMode], default="mnr")
    p.add_argument("--amo", choices=["gac", "naive"], default="gac")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--check-oracle", action="store_true")
    p.add_argument("--stats", action="store_true", help="print search counters to stderr")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("bench", help="gac vs naive AMO placement on a threshold grid")
    p.add_argument("--data", nargs="*", default=[])
    p.add_argument("--synthetic", type=int, default=0, help="number of random databases")
    p.add_argument("--items", type=int, default=15)
    p.add_argument("--transactions", type=int, default=30)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-step", type=int, default=25)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--amo", choices=["both", "gac", "naive"], default="both")
    p.add_argument("--format", choices=["table", "lines", "both"], default="both")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DbParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except MiningError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

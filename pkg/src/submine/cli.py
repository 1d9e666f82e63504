"""Command-line front end: mine theories, verify engines against each
other, and benchmark engines over query suites.

Exit codes: 0 success, 1 error, 2 timeout.  Result files are TSV lines
``item_groups  trans_groups  itemset  support  freq`` in canonical order;
frequencies print as exact ``support/active`` fractions.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import reference
from .dataset import (
    PartitionScheme,
    TransactionDatabase,
    parse_fimi,
    parse_labels,
    parse_partition,
)
from .engine import SearchTimeout
from .queries import Query, AxisConstraint, build_query, parse_query, run_theory

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2

# test harness hook: maps engine name to a replacement theory runner
_ENGINE_OVERRIDES: dict = {}


@dataclass
class RunReport:
    name: str
    engine: str
    masks: int
    solutions: int
    time_sec: float
    work: int
    status: str
    detail: str = ""
    axis_cols: tuple = ("", "", "", "")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(args):
    db = parse_fimi(_read(args.data))
    if getattr(args, "labels", None):
        db = db.with_labels(parse_labels(_read(args.labels)))
    item_scheme = trans_scheme = None
    if getattr(args, "item_cats", None):
        item_scheme = parse_partition(_read(args.item_cats), db, "items")
    if getattr(args, "trans_cats", None):
        trans_scheme = parse_partition(_read(args.trans_cats), db, "transactions")
    query = build_query(parse_query(_read(args.query)), db, item_scheme, trans_scheme)
    return db, item_scheme, trans_scheme, query


def _deadline(args):
    timeout = getattr(args, "timeout", None)
    return None if timeout is None else time.monotonic() + timeout


def _run_engine(name, db, query, item_scheme, trans_scheme, deadline, workers=1, stats=None):
    if name in _ENGINE_OVERRIDES:
        return _ENGINE_OVERRIDES[name](db, query, item_scheme, trans_scheme)
    return run_theory(
        db,
        query,
        item_scheme,
        trans_scheme,
        engine=name,
        workers=workers,
        deadline=deadline,
        stats=stats,
    )


def cmd_mine(args) -> int:
    try:
        db, item_scheme, trans_scheme, query = _load(args)
        pairs = _run_engine(
            args.engine or query.engine,
            db,
            query,
            item_scheme,
            trans_scheme,
            _deadline(args),
            workers=args.parallel,
        )
    except SearchTimeout:
        print("timeout exceeded", file=sys.stderr)
        return EXIT_TIMEOUT
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = "".join(p.tsv() + "\n" for p in pairs)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.seeds:
        return _verify_random(args)
    try:
        db, item_scheme, trans_scheme, query = _load(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    deadline = _deadline(args)
    theories = {}
    for name in ("cp", "baseline", "oracle"):
        try:
            theories[name] = _run_engine(
                name, db, query, item_scheme, trans_scheme, deadline
            )
        except SearchTimeout:
            print(f"{name}: timeout", file=sys.stderr)
            return EXIT_TIMEOUT
        except (OSError, ValueError, RuntimeError) as exc:
            print(f"error in engine {name}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        print(f"{name}: {len(theories[name])} pairs")
    return _diff_theories(theories)


def _diff_theories(theories) -> int:
    names = list(theories)
    base = names[0]
    ok = True
    for other in names[1:]:
        left, right = set(theories[base]), set(theories[other])
        if left != right:
            ok = False
            diff = sorted(left ^ right, key=lambda p: p.sort_key())
            where = "only in " + (base if diff[0] in left else other)
            print(f"MISMATCH {base} vs {other}: first differing pair ({where}):")
            print("  " + diff[0].tsv())
    if ok:
        print("theories agree")
        return EXIT_OK
    return EXIT_ERROR


def _verify_random(args) -> int:
    rng = random.Random(args.seed)
    failures = 0
    for k in range(args.seeds):
        db, item_scheme, trans_scheme, query = generate_random_instance(rng)
        results = {}
        for name in ("cp", "baseline", "oracle"):
            results[name] = _run_engine(
                name, db, query, item_scheme, trans_scheme, _deadline(args)
            )
        sizes = {name: len(pairs) for name, pairs in results.items()}
        agree = (
            set(results["cp"]) == set(results["baseline"]) == set(results["oracle"])
        )
        status = "ok" if agree else "MISMATCH"
        print(f"seed {k}: {status} {sizes}")
        if not agree:
            failures += 1
    if failures:
        print(f"{failures}/{args.seeds} random instances disagree", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def generate_random_instance(rng: random.Random):
    """Random small instance for cross-engine verification: a database with
    at most 10 items and 8 transactions, random partitions on both axes,
    a random threshold, and a random query family."""
    n = rng.randint(3, 10)
    m = rng.randint(3, 8)
    density = rng.uniform(0.3, 0.7)
    rows = [
        [i for i in range(1, n + 1) if rng.random() < density] for _ in range(m)
    ]
    db = TransactionDatabase.from_rows(rows, item_count=n)
    item_scheme = _random_partition(rng, "items", n)
    trans_scheme = _random_partition(rng, "transactions", m)
    theta = rng.choice((Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)))
    min_size = rng.choice((1, 1, 1, 2))
    family = rng.choice(("q1", "q1'", "q2", "q3", "q4"))
    span = None
    items = trans = AxisConstraint.all_active()
    if family == "q1'":
        span = _random_bounds(rng, item_scheme.group_count())
    if family in ("q2", "q4"):
        items = AxisConstraint.group_bounds(*_random_bounds(rng, item_scheme.group_count()))
    if family in ("q3", "q4"):
        trans = AxisConstraint.group_bounds(*_random_bounds(rng, trans_scheme.group_count()))
    query = Query(
        theta=theta,
        closed=True,
        min_size=min_size,
        span=span,
        items=items,
        trans=trans,
    )
    return db, item_scheme, trans_scheme, query


def _random_bounds(rng, k):
    lb = rng.randint(1, k)
    return lb, rng.randint(lb, k)


def _random_partition(rng, axis, size):
    k = rng.randint(2, max(2, min(4, size)))
    ids = list(range(1, size + 1))
    rng.shuffle(ids)
    cuts = sorted(rng.sample(range(1, size), k - 1)) if size > 1 else []
    groups = []
    prev = 0
    for gi, cut in enumerate([*cuts, size]):
        groups.append((f"G{gi + 1}", ids[prev:cut]))
        prev = cut
    return PartitionScheme.build(axis, size, [g for g in groups if g[1]])


def cmd_bench(args) -> int:
    try:
        with open(args.suite, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    reports = []
    for row in rows:
        reports.extend(_bench_row(row, args))
    out = args.out
    fh = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            (
                "name",
                "engine",
                "item_cats",
                "item_bounds",
                "trans_cats",
                "trans_bounds",
                "num_masks",
                "solutions",
                "work",
                "time_sec",
                "status",
                "detail",
            )
        )
        for r in reports:
            writer.writerow(
                (
                    r.name,
                    r.engine,
                    *r.axis_cols,
                    r.masks,
                    r.solutions,
                    r.work,
                    f"{r.time_sec:.3f}",
                    r.status,
                    r.detail,
                )
            )
    finally:
        if out:
            fh.close()
    return EXIT_OK


def _bench_row(row, args):
    name = row.get("name") or row.get("data", "?")
    engines = (row.get("engines") or "cp").split("|")
    reports = []

    class _Args:
        pass

    sub = _Args()
    sub.data = row.get("data")
    sub.query = row.get("query")
    sub.item_cats = row.get("item_cats") or None
    sub.trans_cats = row.get("trans_cats") or None
    sub.labels = row.get("labels") or None
    try:
        db, item_scheme, trans_scheme, query = _load(sub)
        num_masks = reference.enumerate_masks(
            db, query, item_scheme, trans_scheme
        ).count()
    except (OSError, ValueError) as exc:
        for engine in engines:
            reports.append(RunReport(name, engine, 0, 0, 0.0, 0, "error", str(exc)))
        return reports

    axis_cols = (
        str(item_scheme.group_count()) if item_scheme else "",
        _bounds_str(query.items),
        str(trans_scheme.group_count()) if trans_scheme else "",
        _bounds_str(query.trans),
    )
    for engine in engines:
        stats: dict = {}
        started = time.perf_counter()
        deadline = (
            time.monotonic() + args.timeout if args.timeout is not None else None
        )
        try:
            pairs = _run_engine(
                engine, db, query, item_scheme, trans_scheme, deadline, stats=stats
            )
            elapsed = time.perf_counter() - started
            rep = RunReport(
                name,
                engine,
                num_masks,
                len(pairs),
                elapsed,
                stats.get("nodes", stats.get("masks", 0)),
                "ok",
            )
        except SearchTimeout:
            elapsed = time.perf_counter() - started
            rep = RunReport(name, engine, num_masks, 0, elapsed, 0, "to")
        except (ValueError, RuntimeError) as exc:
            elapsed = time.perf_counter() - started
            rep = RunReport(name, engine, num_masks, 0, elapsed, 0, "error", str(exc))
        rep.axis_cols = axis_cols
        reports.append(rep)
    return reports


def _bounds_str(con: AxisConstraint) -> str:
    if con.kind == "groups":
        return f"({con.lb},{con.ub})"
    return con.kind


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="submine",
        description="Mine itemsets in user-constrained sub-datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_engine=True):
        p.add_argument("--data", required=True, help="FIMI transaction file")
        p.add_argument("--query", required=True, help="query file")
        p.add_argument("--item-cats", dest="item_cats", help="item partition file")
        p.add_argument("--trans-cats", dest="trans_cats", help="transaction partition file")
        p.add_argument("--labels", help="item label file (id label per line)")
        p.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
        if with_engine:
            p.add_argument("--engine", choices=("cp", "baseline", "oracle"))

    p_mine = sub.add_parser("mine", help="extract the theory of a query")
    add_common(p_mine)
    p_mine.add_argument("--out", help="result file (default stdout)")
    p_mine.add_argument("--parallel", type=int, default=1, metavar="K")
    p_mine.set_defaults(func=cmd_mine)

    p_verify = sub.add_parser("verify", help="cross-check cp, baseline, oracle")
    p_verify.add_argument("--data")
    p_verify.add_argument("--query")
    p_verify.add_argument("--item-cats", dest="item_cats")
    p_verify.add_argument("--trans-cats", dest="trans_cats")
    p_verify.add_argument("--labels")
    p_verify.add_argument("--timeout", type=float)
    p_verify.add_argument("--seeds", type=int, help="verify K random instances instead")
    p_verify.add_argument("--seed", type=int, default=20240, help="base RNG seed")
    p_verify.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="run a suite and emit a CSV report")
    p_bench.add_argument("--suite", required=True, help="suite CSV")
    p_bench.add_argument("--out", help="report CSV (default stdout)")
    p_bench.add_argument("--timeout", type=float)
    p_bench.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    if args.command == "verify" and not args.seeds and not (args.data and args.query):
        parser.error("verify needs --data and --query (or --seeds K)")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Declarative queries compiled onto a database and partition schemes.

A query bundles a minimum frequency, itemset-side constraints (closedness,
minimum size, category span, required/forbidden items) and dataset-side
constraints (which items/transactions are active).  ``run_theory`` returns
the complete theory of (sub-dataset, itemset) pairs, canonically sorted,
and re-validates every pair against the raw definitions before returning.

Query file grammar (one ``key: value`` per line, ``#`` comments, unknown
keys rejected)::

    theta: 1/2            # or 50%  or 0.5   -- minimum frequency, exact
    closed: true          # default true
    minsize: 2            # default 1
    span: 1 2             # itemset touches between lb and ub item groups
    require: A K          # item labels (or ids) that must appear
    forbid: C D           # item labels (or ids) that must not appear
    items_active: 2 3     # lb ub over item groups | all | list <labels>
    trans_active: all     # lb ub | all | list <ids> | one-of-levels
    engine: cp            # cp | baseline | oracle (CLI flag overrides)
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import IO, Iterable

from . import closedpattern, constraints
from .dataset import (
    Mask,
    PartitionScheme,
    TransactionDatabase,
    bits_of,
    closure,
    cover,
    indices_of,
    iter_bits,
)
from .engine import ROLE_H, ROLE_V, ROLE_X, ROLE_Y, Solver

ENGINES = ("cp", "baseline", "oracle")

_QUERY_KEYS = (
    "theta",
    "closed",
    "minsize",
    "span",
    "require",
    "forbid",
    "items_active",
    "trans_active",
    "engine",
)


class QueryError(ValueError):
    """Bad query description: grammar, unknown names, or bounds."""


@dataclass(frozen=True)
class AxisConstraint:
    """Dataset-side constraint on one axis.

    kind "all" activates everything, "fixed" exactly the given bitset,
    "groups" any lb..ub whole groups of the partition, "one_per_level"
    exactly one group drawn from any level of the scheme.
    """

    kind: str
    members: int = 0
    lb: int = 0
    ub: int = 0

    @classmethod
    def all_active(cls) -> "AxisConstraint":
        return cls("all")

    @classmethod
    def fixed(cls, members: int) -> "AxisConstraint":
        return cls("fixed", members=members)

    @classmethod
    def group_bounds(cls, lb: int, ub: int) -> "AxisConstraint":
        return cls("groups", lb=lb, ub=ub)

    @classmethod
    def one_per_level(cls) -> "AxisConstraint":
        return cls("one_per_level")


@dataclass(frozen=True)
class Query:
    theta: Fraction
    closed: bool = True
    min_size: int = 1
    span: tuple[int, int] | None = None
    require: int = 0
    forbid: int = 0
    items: AxisConstraint = AxisConstraint("all")
    trans: AxisConstraint = AxisConstraint("all")
    engine: str = "cp"

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise QueryError(f"theta must lie in (0,1], got {self.theta}")
        if self.min_size < 1:
            raise QueryError("minsize must be at least 1")
        if self.engine not in ENGINES:
            raise QueryError(f"unknown engine {self.engine!r}")
        if self.require & self.forbid:
            bad = next(iter_bits(self.require & self.forbid))
            raise QueryError(f"item {bad} both required and forbidden")


@dataclass(frozen=True)
class SolutionPair:
    """One element of a theory: a sub-dataset plus an itemset with its
    support.  Identity is index-based; group names and labels ride along
    for display only."""

    item_mask: tuple[int, ...]
    trans_mask: tuple[int, ...]
    items: tuple[int, ...]
    support: int
    item_desc: str = field(compare=False, default="", hash=False)
    trans_desc: str = field(compare=False, default="", hash=False)
    labels: tuple[str, ...] = field(compare=False, default=(), hash=False)

    @property
    def frequency(self) -> Fraction:
        return Fraction(self.support, len(self.trans_mask))

    def freq_str(self) -> str:
        return f"{self.support}/{len(self.trans_mask)}"

    def sort_key(self):
        return (self.item_mask, self.trans_mask, self.items)

    def tsv(self) -> str:
        return "\t".join(
            (
                self.item_desc,
                self.trans_desc,
                " ".join(self.labels),
                str(self.support),
                self.freq_str(),
            )
        )


def describe_mask(bits: int, universe: int, scheme: PartitionScheme | None) -> str:
    """Group names joined by '+' when the mask is a union of whole groups
    of one level, 'ALL' for the full axis, else the explicit index list."""
    if bits == universe:
        return "ALL"
    if scheme is not None:
        for level in scheme.levels:
            chosen = [g for g in level if g.members & bits]
            if chosen and all((g.members & ~bits) == 0 for g in chosen):
                union = 0
                for g in chosen:
                    union |= g.members
                if union == bits:
                    return "+".join(g.name for g in chosen)
    return "{" + ",".join(str(i) for i in iter_bits(bits)) + "}"


def make_pair(
    db: TransactionDatabase,
    item_bits: int,
    trans_bits: int,
    itemset_bits: int,
    item_scheme: PartitionScheme | None = None,
    trans_scheme: PartitionScheme | None = None,
) -> SolutionPair:
    support = cover(db, itemset_bits, Mask(item_bits, trans_bits)).bit_count()
    return SolutionPair(
        item_mask=indices_of(item_bits),
        trans_mask=indices_of(trans_bits),
        items=indices_of(itemset_bits),
        support=support,
        item_desc=describe_mask(item_bits, db.all_items(), item_scheme),
        trans_desc=describe_mask(trans_bits, db.all_transactions(), trans_scheme),
        labels=db.labels_for(itemset_bits),
    )


# ----------------------------------------------------------------- parsing


def parse_query(source: str | IO[str]) -> dict[str, str]:
    """Parse the query file into a raw key/value mapping."""
    text = source.read() if hasattr(source, "read") else source
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        value = value.strip()
        if not sep or not key:
            raise QueryError(f"line {lineno}: expected 'key: value'")
        if key not in _QUERY_KEYS:
            raise QueryError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise QueryError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    if "theta" not in out:
        raise QueryError("query is missing required key 'theta'")
    return out


def _parse_theta(text: str) -> Fraction:
    try:
        if text.endswith("%"):
            theta = Fraction(text[:-1].strip()) / 100
        else:
            theta = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise QueryError(f"cannot parse frequency {text!r}") from None
    if not 0 < theta <= 1:
        raise QueryError(f"theta must lie in (0,1], got {text!r}")
    return theta


def _resolve_items(tokens: Iterable[str], db: TransactionDatabase) -> int:
    by_label = {}
    if db.item_labels:
        by_label = {lab: i for i, lab in db.item_labels.items()}
    bits = 0
    for tok in tokens:
        if tok in by_label:
            i = by_label[tok]
        else:
            try:
                i = int(tok)
            except ValueError:
                raise QueryError(f"unknown item label {tok!r}") from None
        if not 1 <= i <= db.item_count:
            raise QueryError(f"item {i} out of range 1..{db.item_count}")
        bits |= 1 << i
    return bits


def _parse_axis(
    key: str,
    value: str,
    db: TransactionDatabase,
    scheme: PartitionScheme | None,
    axis: str,
) -> AxisConstraint:
    parts = value.split()
    if value == "all":
        return AxisConstraint.all_active()
    if value == "one-of-levels":
        if axis != "transactions":
            raise QueryError(f"{key}: one-of-levels applies to transactions")
        if scheme is None:
            raise QueryError(f"{key}: one-of-levels needs a transaction scheme")
        return AxisConstraint.one_per_level()
    if parts and parts[0] == "list":
        if axis == "items":
            bits = _resolve_items(parts[1:], db)
        else:
            bits = 0
            for tok in parts[1:]:
                try:
                    j = int(tok)
                except ValueError:
                    raise QueryError(f"{key}: bad transaction index {tok!r}") from None
                if not 1 <= j <= db.transaction_count:
                    raise QueryError(
                        f"{key}: transaction {j} out of range 1..{db.transaction_count}"
                    )
                bits |= 1 << j
        return AxisConstraint.fixed(bits)
    if len(parts) == 2 and all(p.lstrip("-").isdigit() for p in parts):
        lb, ub = int(parts[0]), int(parts[1])
        if scheme is None:
            raise QueryError(f"{key}: group bounds need a partition scheme")
        k = scheme.group_count()
        if not 0 <= lb <= ub <= k:
            raise QueryError(f"{key}: bounds ({lb},{ub}) invalid for {k} groups")
        return AxisConstraint.group_bounds(lb, ub)
    raise QueryError(f"{key}: cannot parse {value!r}")


def build_query(
    desc: dict[str, str],
    db: TransactionDatabase,
    item_scheme: PartitionScheme | None = None,
    trans_scheme: PartitionScheme | None = None,
) -> Query:
    """Resolve a parsed query description against a database and schemes."""
    unknown = set(desc) - set(_QUERY_KEYS)
    if unknown:
        raise QueryError(f"unknown keys: {sorted(unknown)}")
    if "theta" not in desc:
        raise QueryError("query is missing required key 'theta'")
    theta = _parse_theta(desc["theta"])

    closed = True
    if "closed" in desc:
        val = desc["closed"].lower()
        if val not in ("true", "false"):
            raise QueryError(f"closed: expected true or false, got {desc['closed']!r}")
        closed = val == "true"

    min_size = 1
    if "minsize" in desc:
        try:
            min_size = int(desc["minsize"])
        except ValueError:
            raise QueryError(f"minsize: not an integer: {desc['minsize']!r}") from None
        if not 1 <= min_size <= db.item_count:
            raise QueryError(f"minsize {min_size} out of range 1..{db.item_count}")

    span = None
    if "span" in desc:
        parts = desc["span"].split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise QueryError(f"span: expected 'lb ub', got {desc['span']!r}")
        if item_scheme is None:
            raise QueryError("span needs an item partition scheme")
        lb, ub = int(parts[0]), int(parts[1])
        if not 0 <= lb <= ub <= item_scheme.group_count():
            raise QueryError(
                f"span bounds ({lb},{ub}) invalid for {item_scheme.group_count()} groups"
            )
        span = (lb, ub)

    require = _resolve_items(desc["require"].split(), db) if "require" in desc else 0
    forbid = _resolve_items(desc["forbid"].split(), db) if "forbid" in desc else 0

    items = AxisConstraint.all_active()
    if "items_active" in desc:
        items = _parse_axis("items_active", desc["items_active"], db, item_scheme, "items")
    trans = AxisConstraint.all_active()
    if "trans_active" in desc:
        trans = _parse_axis(
            "trans_active", desc["trans_active"], db, trans_scheme, "transactions"
        )

    engine = desc.get("engine", "cp").lower()
    if engine not in ENGINES:
        raise QueryError(f"unknown engine {engine!r}")

    return Query(
        theta=theta,
        closed=closed,
        min_size=min_size,
        span=span,
        require=require,
        forbid=forbid,
        items=items,
        trans=trans,
        engine=engine,
    )


def _check_context(
    query: Query,
    db: TransactionDatabase,
    item_scheme: PartitionScheme | None,
    trans_scheme: PartitionScheme | None,
) -> None:
    if query.items.kind == "groups":
        if item_scheme is None:
            raise QueryError("item group bounds need an item scheme")
        k = item_scheme.group_count()
        if not 0 <= query.items.lb <= query.items.ub <= k:
            raise QueryError(
                f"item bounds ({query.items.lb},{query.items.ub}) invalid for {k} groups"
            )
    if query.items.kind == "one_per_level":
        raise QueryError("one-of-levels applies to transactions only")
    if query.trans.kind == "groups":
        if trans_scheme is None:
            raise QueryError("transaction group bounds need a transaction scheme")
        k = trans_scheme.group_count()
        if not 0 <= query.trans.lb <= query.trans.ub <= k:
            raise QueryError(
                f"transaction bounds ({query.trans.lb},{query.trans.ub}) invalid for {k} groups"
            )
    if query.trans.kind == "one_per_level" and trans_scheme is None:
        raise QueryError("one-of-levels needs a transaction scheme")
    if query.span is not None:
        if item_scheme is None:
            raise QueryError("span needs an item scheme")
        if not 0 <= query.span[0] <= query.span[1] <= item_scheme.group_count():
            raise QueryError(f"span bounds {query.span} invalid")
    if query.items.kind == "fixed" and query.items.members & ~db.all_items():
        raise QueryError("fixed item activation references unknown items")
    if query.trans.kind == "fixed" and query.trans.members & ~db.all_transactions():
        raise QueryError("fixed transaction activation references unknown transactions")


# ---------------------------------------------------------------- assembly


@dataclass
class Layout:
    """Variable handles of an assembled solver, 1-based per axis."""

    x: list
    y: list
    h: list
    v: list
    item_indicators: list[int]
    trans_indicators: list[int]


def assemble(
    db: TransactionDatabase,
    query: Query,
    item_scheme: PartitionScheme | None = None,
    trans_scheme: PartitionScheme | None = None,
    use_reified: bool = False,
) -> tuple[Solver, Layout]:
    """Compile the query into a solver: variables X/Y/H/V plus group
    auxiliaries, channeling, the dataset part, and the mining part."""
    _check_context(query, db, item_scheme, trans_scheme)
    n, m = db.item_count, db.transaction_count
    s = Solver()
    h = [None] + s.new_vars(n, ROLE_H)
    v = [None] + s.new_vars(m, ROLE_V)
    x = [None] + s.new_vars(n, ROLE_X)
    y = [None] + s.new_vars(m, ROLE_Y)
    layout = Layout(x, y, h, v, [], [])

    constraints.post_channeling(s, h[1:], x[1:], v[1:], y[1:])

    # dataset part
    if query.items.kind == "all":
        for i in range(1, n + 1):
            s.assign_root(h[i], 1)
    elif query.items.kind == "fixed":
        for i in range(1, n + 1):
            s.assign_root(h[i], 1 if query.items.members >> i & 1 else 0)
    elif query.items.kind == "groups":
        layout.item_indicators = constraints.post_group_activation(
            s, item_scheme, h, query.items.lb, query.items.ub
        )
    else:  # pragma: no cover - rejected earlier
        raise QueryError(f"unsupported item constraint {query.items.kind!r}")

    if query.trans.kind == "all":
        for j in range(1, m + 1):
            s.assign_root(v[j], 1)
    elif query.trans.kind == "fixed":
        for j in range(1, m + 1):
            s.assign_root(v[j], 1 if query.trans.members >> j & 1 else 0)
    elif query.trans.kind == "groups":
        layout.trans_indicators = constraints.post_group_activation(
            s, trans_scheme, v, query.trans.lb, query.trans.ub
        )
    elif query.trans.kind == "one_per_level":
        layout.trans_indicators = constraints.post_exactly_one_group(s, trans_scheme, v)
    else:  # pragma: no cover
        raise QueryError(f"unsupported transaction constraint {query.trans.kind!r}")

    # a sub-dataset with no transactions has no defined frequencies
    s.post(constraints.CardinalityRange([v[j] for j in range(1, m + 1)], 1, None))

    # mining part: itemsets are non-empty by definition
    constraints.post_min_size(s, x, max(1, query.min_size))
    if query.span is not None:
        constraints.post_category_span(s, x, item_scheme, query.span[0], query.span[1])
    for i in iter_bits(query.require):
        constraints.post_required_item(s, x, i)
    if query.forbid:
        constraints.post_forbidden_items(s, x, query.forbid)

    if use_reified:
        constraints.post_reified_fci(s, db, x, y, h, v, query.theta, closed=query.closed)
    elif query.closed:
        closedpattern.post_closed_pattern_sub(s, db, x, h, y, v, query.theta)
    else:
        closedpattern.post_frequent_sub(s, db, x, h, y, v, query.theta)
    return s, layout


# ---------------------------------------------------------------- running


def _collect_cp(
    db: TransactionDatabase,
    query: Query,
    item_scheme,
    trans_scheme,
    use_reified: bool,
    deadline: float | None,
    stats: dict | None,
) -> set[tuple[int, int, int]]:
    solver, layout = assemble(db, query, item_scheme, trans_scheme, use_reified)
    n, m = db.item_count, db.transaction_count
    triples: set[tuple[int, int, int]] = set()

    def sink(snap):
        ib = tb = xb = 0
        for i in range(1, n + 1):
            if snap[layout.h[i]] == 1:
                ib |= 1 << i
            if snap[layout.x[i]] == 1:
                xb |= 1 << i
        for j in range(1, m + 1):
            if snap[layout.v[j]] == 1:
                tb |= 1 << j
        triples.add((ib, tb, xb))

    should_stop = None
    if deadline is not None:
        should_stop = lambda: time.monotonic() > deadline
    solver.search_all(on_solution=sink, should_stop=should_stop)
    if stats is not None:
        stats["nodes"] = stats.get("nodes", 0) + solver.stats["nodes"]
        stats["masks"] = stats.get("masks", 0) + solver.stats["masks_reached"]
    return triples


def _theory_task(db, query, item_scheme, trans_scheme, engine, use_reified, deadline):
    """Worker for the parallel mode: one fixed mask, serial run."""
    if engine == "cp":
        return _collect_cp(db, query, item_scheme, trans_scheme, use_reified, deadline, None)
    from . import reference

    pairs = reference.pp_mine(db, query, item_scheme, trans_scheme, deadline=deadline)
    return {(bits_of(p.item_mask), bits_of(p.trans_mask), bits_of(p.items)) for p in pairs}


def run_theory(
    db: TransactionDatabase,
    query: Query,
    item_scheme: PartitionScheme | None = None,
    trans_scheme: PartitionScheme | None = None,
    engine: str | None = None,
    workers: int = 1,
    deadline: float | None = None,
    use_reified: bool = False,
    stats: dict | None = None,
) -> list[SolutionPair]:
    """The complete theory of the query, canonically sorted (masks then
    itemsets, lexicographic on indices).  The solution set is identical
    for every engine; each pair is re-validated before being returned."""
    from . import reference

    chosen = engine or query.engine
    if chosen not in ENGINES:
        raise QueryError(f"unknown engine {chosen!r}")
    _check_context(query, db, item_scheme, trans_scheme)

    if workers > 1 and chosen in ("cp", "baseline"):
        triples = _run_parallel(
            db, query, item_scheme, trans_scheme, chosen, workers, use_reified, deadline
        )
        pairs = [
            make_pair(db, ib, tb, xb, item_scheme, trans_scheme) for ib, tb, xb in triples
        ]
    elif chosen == "cp":
        triples = _collect_cp(
            db, query, item_scheme, trans_scheme, use_reified, deadline, stats
        )
        pairs = [
            make_pair(db, ib, tb, xb, item_scheme, trans_scheme) for ib, tb, xb in triples
        ]
    elif chosen == "baseline":
        pairs = reference.pp_mine(
            db, query, item_scheme, trans_scheme, deadline=deadline, stats=stats
        )
    else:
        pairs = reference.brute_force_theory(
            db, query, item_scheme, trans_scheme, deadline=deadline
        )

    pairs = sorted(set(pairs), key=SolutionPair.sort_key)
    for pair in pairs:
        validate_pair(db, query, pair, item_scheme, trans_scheme)
    return pairs


def _run_parallel(
    db, query, item_scheme, trans_scheme, engine, workers, use_reified, deadline
) -> set[tuple[int, int, int]]:
    import multiprocessing

    from . import reference

    masks = []
    seen = set()
    for mask in reference.enumerate_masks(db, query, item_scheme, trans_scheme):
        key = (mask.active_items, mask.active_transactions)
        if key not in seen:
            seen.add(key)
            masks.append(mask)
    tasks = [
        (
            db,
            replace(
                query,
                items=AxisConstraint.fixed(mask.active_items),
                trans=AxisConstraint.fixed(mask.active_transactions),
            ),
            item_scheme,
            trans_scheme,
            engine,
            use_reified,
            deadline,
        )
        for mask in masks
    ]
    triples: set[tuple[int, int, int]] = set()
    if not tasks:
        return triples
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(workers) as pool:
        for part in pool.starmap(_theory_task, tasks):
            triples |= part
    return triples


# -------------------------------------------------------------- validation


def _axis_satisfied(
    con: AxisConstraint, bits: int, universe: int, scheme: PartitionScheme | None
) -> bool:
    if con.kind == "all":
        return bits == universe
    if con.kind == "fixed":
        return bits == con.members
    if con.kind == "groups":
        chosen = [g for g in scheme.groups if g.members & bits]
        if any(g.members & ~bits for g in chosen):
            return False
        union = 0
        for g in chosen:
            union |= g.members
        return union == bits and con.lb <= len(chosen) <= con.ub
    if con.kind == "one_per_level":
        return any(g.members == bits for level in scheme.levels for g in level)
    return False


def validate_pair(
    db: TransactionDatabase,
    query: Query,
    pair: SolutionPair,
    item_scheme: PartitionScheme | None = None,
    trans_scheme: PartitionScheme | None = None,
) -> None:
    """Re-check a solution pair from first principles; raises RuntimeError
    on any violation.  Runs after every engine as a self-check."""
    item_bits = bits_of(pair.item_mask)
    trans_bits = bits_of(pair.trans_mask)
    itemset = bits_of(pair.items)
    mask = Mask(item_bits, trans_bits)

    def bad(msg: str):
        raise RuntimeError(f"solution failed self-check ({msg}): {pair}")

    if itemset == 0:
        bad("empty itemset")
    if itemset & ~item_bits:
        bad("itemset outside active items")
    if trans_bits == 0:
        bad("no active transactions")
    cov = cover(db, itemset, mask)
    if cov.bit_count() != pair.support:
        bad("support mismatch")
    n_active = trans_bits.bit_count()
    if pair.support * query.theta.denominator < query.theta.numerator * n_active:
        bad("below minimum frequency")
    if query.closed and closure(db, itemset, mask) != itemset:
        bad("not closed in the sub-dataset")
    if itemset.bit_count() < query.min_size:
        bad("below minimum size")
    if query.require & ~itemset:
        bad("missing required item")
    if query.forbid & itemset:
        bad("contains forbidden item")
    if query.span is not None:
        touched = sum(1 for g in item_scheme.groups if g.members & itemset)
        if not query.span[0] <= touched <= query.span[1]:
            bad("category span out of bounds")
    if not _axis_satisfied(query.items, item_bits, db.all_items(), item_scheme):
        bad("item activation violates dataset constraint")
    if not _axis_satisfied(query.trans, trans_bits, db.all_transactions(), trans_scheme):
        bad("transaction activation violates dataset constraint")

"""Transactional datasets, category schemes, and cover/closure primitives.

Items and transactions are dense 1-based integer indices.  Index sets are
plain Python ints used as bitsets: bit i holds index i, bit 0 stays clear.
Frequencies are exact rationals; nothing in this module touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import IO, Iterable, Iterator


class FormatError(ValueError):
    """Malformed input file; the message carries the 1-based line number."""


class EmptyDatabaseError(ValueError):
    """The parsed data contains no transactions."""


# ----------------------------------------------------------------- bitsets


def bits_of(indices: Iterable[int]) -> int:
    """Pack an iterable of indices into a bitset."""
    b = 0
    for i in indices:
        b |= 1 << i
    return b


def iter_bits(b: int) -> Iterator[int]:
    """Yield the set bit positions of ``b`` in increasing order."""
    while b:
        low = b & -b
        yield low.bit_length() - 1
        b ^= low


def indices_of(b: int) -> tuple[int, ...]:
    return tuple(iter_bits(b))


def span_bits(lo: int, hi: int) -> int:
    """Bitset holding every index in [lo, hi]."""
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << lo


# ---------------------------------------------------------------- database


@dataclass(frozen=True)
class TransactionDatabase:
    """Immutable 0/1 incidence structure with dual row/column bitset views.

    ``columns[i]`` is the bitset of transactions containing item i;
    ``rows[j]`` is the bitset of items in transaction j.  Slot 0 of either
    tuple is unused.  Labels are presentation-only.
    """

    item_count: int
    transaction_count: int
    columns: tuple[int, ...]
    rows: tuple[int, ...]
    item_labels: dict[int, str] | None = None

    @classmethod
    def from_rows(
        cls,
        row_items: Iterable[Iterable[int]],
        item_count: int | None = None,
        item_labels: dict[int, str] | None = None,
    ) -> "TransactionDatabase":
        """Build a database from per-transaction item collections."""
        row_bits: list[int] = [0]
        max_item = 0
        for items in row_items:
            b = bits_of(items)
            if b & 1:
                raise ValueError("item indices must be >= 1")
            if b:
                max_item = max(max_item, b.bit_length() - 1)
            row_bits.append(b)
        m = len(row_bits) - 1
        if m == 0:
            raise EmptyDatabaseError("database has no transactions")
        n = item_count if item_count is not None else max_item
        if n < max_item:
            raise ValueError(f"item index {max_item} exceeds item_count={n}")
        if n < 1:
            raise ValueError("database needs at least one item")
        cols = [0] * (n + 1)
        for j in range(1, m + 1):
            for i in iter_bits(row_bits[j]):
                cols[i] |= 1 << j
        return cls(n, m, tuple(cols), tuple(row_bits), item_labels)

    def with_labels(self, labels: dict[int, str]) -> "TransactionDatabase":
        return replace(self, item_labels=dict(labels))

    # -- views -------------------------------------------------------------

    def column(self, item: int) -> int:
        if not 1 <= item <= self.item_count:
            raise ValueError(f"item index {item} out of range 1..{self.item_count}")
        return self.columns[item]

    def row(self, trans: int) -> int:
        if not 1 <= trans <= self.transaction_count:
            raise ValueError(
                f"transaction index {trans} out of range 1..{self.transaction_count}"
            )
        return self.rows[trans]

    def all_items(self) -> int:
        return span_bits(1, self.item_count)

    def all_transactions(self) -> int:
        return span_bits(1, self.transaction_count)

    def full_mask(self) -> "Mask":
        return Mask(self.all_items(), self.all_transactions())

    def label(self, item: int) -> str:
        if self.item_labels and item in self.item_labels:
            return self.item_labels[item]
        return str(item)

    def labels_for(self, item_bits: int) -> tuple[str, ...]:
        return tuple(self.label(i) for i in iter_bits(item_bits))

    def density(self) -> Fraction:
        ones = sum(r.bit_count() for r in self.rows)
        return Fraction(ones, self.item_count * self.transaction_count)


@dataclass(frozen=True)
class Mask:
    """Active item/transaction selection circumscribing a sub-dataset."""

    active_items: int
    active_transactions: int

    def restrict(self, items: int | None = None, trans: int | None = None) -> "Mask":
        return Mask(
            self.active_items if items is None else self.active_items & items,
            self.active_transactions
            if trans is None
            else self.active_transactions & trans,
        )


# ----------------------------------------------------------------- parsing


def _read_lines(source: str | IO[str]) -> list[str]:
    if hasattr(source, "read"):
        return source.read().splitlines()
    return source.splitlines()


def parse_fimi(source: str | IO[str]) -> TransactionDatabase:
    """Parse FIMI transaction data: one transaction per non-blank line,
    whitespace-separated positive integer item ids.  Duplicate items within
    a line collapse to a single occurrence."""
    rows: list[set[int]] = []
    for lineno, raw in enumerate(_read_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        items: set[int] = set()
        for tok in line.split():
            try:
                i = int(tok)
            except ValueError:
                raise FormatError(f"line {lineno}: not an item id: {tok!r}") from None
            if i < 1:
                raise FormatError(f"line {lineno}: item ids must be positive, got {i}")
            items.add(i)
        rows.append(items)
    if not rows:
        raise EmptyDatabaseError("no transactions in input")
    return TransactionDatabase.from_rows(rows)


def parse_labels(source: str | IO[str]) -> dict[int, str]:
    """Parse an item-label file: ``<id> <label>`` per line, ``#`` comments."""
    labels: dict[int, str] = {}
    for lineno, raw in enumerate(_read_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            i = int(head)
        except ValueError:
            raise FormatError(f"line {lineno}: expected '<id> <label>'") from None
        if not rest:
            raise FormatError(f"line {lineno}: missing label for item {i}")
        labels[i] = rest
    return labels


# --------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Group:
    name: str
    members: int  # bitset

    @property
    def indices(self) -> tuple[int, ...]:
        return indices_of(self.members)

    def size(self) -> int:
        return self.members.bit_count()


@dataclass(frozen=True)
class PartitionScheme:
    """Named disjoint groups of item or transaction indices.

    ``levels`` holds one full partition of 1..size per level; flat schemes
    have a single level.  Indices never mentioned in the input become
    implicit singleton groups.
    """

    axis: str  # "items" | "transactions"
    size: int
    levels: tuple[tuple[Group, ...], ...]

    def __post_init__(self) -> None:
        if self.axis not in ("items", "transactions"):
            raise ValueError(f"unknown axis {self.axis!r}")
        universe = span_bits(1, self.size)
        for level in self.levels:
            seen = 0
            for g in level:
                if g.members & ~universe:
                    bad = next(iter_bits(g.members & ~universe))
                    raise ValueError(
                        f"group {g.name!r}: index {bad} out of range 1..{self.size}"
                    )
                if g.members & seen:
                    dup = next(iter_bits(g.members & seen))
                    raise ValueError(
                        f"group {g.name!r}: index {dup} already in another group"
                    )
                seen |= g.members
            if seen != universe:
                missing = next(iter_bits(universe & ~seen))
                raise ValueError(f"level does not cover index {missing}")

    @property
    def groups(self) -> tuple[Group, ...]:
        return self.levels[0]

    def group_count(self, level: int = 0) -> int:
        return len(self.levels[level])

    @classmethod
    def build(
        cls,
        axis: str,
        size: int,
        groups: Iterable[tuple[str, Iterable[int]]],
        extra_levels: Iterable[Iterable[tuple[str, Iterable[int]]]] = (),
    ) -> "PartitionScheme":
        """Construct a scheme, completing each level with singleton groups."""
        raw_levels = [list(groups)] + [list(lv) for lv in extra_levels]
        levels = []
        for raw in raw_levels:
            lv = [Group(name, bits_of(ids)) for name, ids in raw]
            levels.append(tuple(_complete_level(lv, size, axis, None)))
        return cls(axis, size, tuple(levels))


def _complete_level(
    groups: list[Group],
    size: int,
    axis: str,
    db: TransactionDatabase | None,
) -> list[Group]:
    seen = 0
    taken = set()
    for g in groups:
        seen |= g.members
        taken.add(g.name)
    out = list(groups)
    for i in iter_bits(span_bits(1, size) & ~seen):
        if axis == "items" and db is not None:
            name = db.label(i)
        elif axis == "items":
            name = str(i)
        else:
            name = f"t{i}"
        if name in taken:
            name = f"{name}({i})"
        taken.add(name)
        out.append(Group(name, 1 << i))
    return out


def parse_partition(
    source: str | IO[str],
    db: TransactionDatabase,
    axis: str,
) -> PartitionScheme:
    """Parse a partition file.

    Lines are ``name: id id ...``; optional ``level <k>`` headers introduce
    hierarchy levels; ``#`` begins a comment line.  Unmentioned indices get
    implicit singleton groups in every level.
    """
    if axis == "items":
        size = db.item_count
    elif axis == "transactions":
        size = db.transaction_count
    else:
        raise ValueError(f"unknown axis {axis!r}")

    raw_levels: list[list[Group]] = []
    current: list[Group] = []
    started = False
    last_level_no = 0
    for lineno, raw in enumerate(_read_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "level":
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormatError(f"line {lineno}: expected 'level <k>'")
            k = int(parts[1])
            if k <= last_level_no:
                raise FormatError(f"line {lineno}: level numbers must increase")
            last_level_no = k
            if started:
                raw_levels.append(current)
                current = []
            started = True
            continue
        started = True
        name, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(f"line {lineno}: expected 'name: id id ...'")
        name = name.strip()
        if not name:
            raise FormatError(f"line {lineno}: empty group name")
        if any(g.name == name for g in current):
            raise FormatError(f"line {lineno}: duplicate group name {name!r}")
        members = 0
        for tok in rest.split():
            try:
                i = int(tok)
            except ValueError:
                raise FormatError(f"line {lineno}: not an index: {tok!r}") from None
            if not 1 <= i <= size:
                raise FormatError(f"line {lineno}: index {i} out of range 1..{size}")
            if members >> i & 1:
                raise FormatError(f"line {lineno}: index {i} repeated in {name!r}")
            members |= 1 << i
        current.append(Group(name, members))
    raw_levels.append(current)

    levels = []
    for lv in raw_levels:
        seen = 0
        for g in lv:
            if g.members & seen:
                dup = next(iter_bits(g.members & seen))
                raise FormatError(
                    f"index {dup} appears in two groups of one level (overlap)"
                )
            seen |= g.members
        levels.append(tuple(_complete_level(lv, size, axis, db)))
    return PartitionScheme(axis, size, tuple(levels))


# --------------------------------------------------- covers and closures


def cover(db: TransactionDatabase, itemset: int, mask: Mask) -> int:
    """Transactions of the sub-dataset containing every item of ``itemset``.

    The empty itemset covers every active transaction.
    """
    if itemset & ~mask.active_items:
        bad = next(iter_bits(itemset & ~mask.active_items))
        raise ValueError(f"item {bad} is not active in the mask")
    cov = mask.active_transactions
    for i in iter_bits(itemset):
        cov &= db.columns[i]
        if not cov:
            break
    return cov


def frequency(db: TransactionDatabase, itemset: int, mask: Mask) -> Fraction:
    """Exact frequency |cover(itemset)| / |active transactions|."""
    n_active = mask.active_transactions.bit_count()
    if n_active == 0:
        raise ValueError("frequency undefined: no active transactions")
    return Fraction(cover(db, itemset, mask).bit_count(), n_active)


def closure(db: TransactionDatabase, itemset: int, mask: Mask) -> int:
    """Intersection of the active items of all transactions covering
    ``itemset``; always taken relative to the mask's active items."""
    cov = cover(db, itemset, mask)
    if not cov:
        raise ValueError("closure undefined: itemset has empty cover")
    closed = mask.active_items
    for j in iter_bits(cov):
        closed &= db.rows[j]
        if closed == itemset:
            break
    return closed

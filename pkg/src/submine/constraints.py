"""Propagators wiring masks, itemsets, and covers together.

Variable handles come in 1-based lists (slot 0 unused) matching item and
transaction indices.  Every propagator here is sound for partial states and
complete on full assignments; assemble-level code decides which family
(reified decomposition or the dedicated globals) provides the mining
semantics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .dataset import PartitionScheme, TransactionDatabase, iter_bits, span_bits
from .engine import ROLE_AUX, UNASSIGNED, Propagator, Solver


class Channel(Propagator):
    """gate = 0 forces dep = 0; dep = 1 forces gate = 1 (dep <= gate)."""

    __slots__ = ("gate", "dep")

    def __init__(self, gate: int, dep: int):
        self.gate = gate
        self.dep = dep

    def vars(self):
        return (self.gate, self.dep)

    def entailed(self, s: Solver) -> bool:
        return s.value(self.dep) == 0 or s.value(self.gate) == 1

    def propagate(self, s: Solver) -> bool:
        if s.value(self.gate) == 0:
            return s.assign(self.dep, 0)
        if s.value(self.dep) == 1:
            return s.assign(self.gate, 1)
        return True


class CardinalityRange(Propagator):
    """lb <= sum(vars) <= ub over Boolean vars (ub=None leaves it open)."""

    def __init__(self, variables: Sequence[int], lb: int, ub: int | None = None):
        self.variables = list(variables)
        self.lb = lb
        self.ub = ub

    def vars(self):
        return self.variables

    def entailed(self, s: Solver) -> bool:
        ones = unknown = 0
        for v in self.variables:
            val = s.value(v)
            if val == 1:
                ones += 1
            elif val == UNASSIGNED:
                unknown += 1
        return ones >= self.lb and (self.ub is None or ones + unknown <= self.ub)

    def propagate(self, s: Solver) -> bool:
        ones = 0
        free: list[int] = []
        for v in self.variables:
            val = s.value(v)
            if val == 1:
                ones += 1
            elif val == UNASSIGNED:
                free.append(v)
        if self.ub is not None and ones > self.ub:
            return False
        if ones + len(free) < self.lb:
            return False
        if self.ub is not None and ones == self.ub:
            for v in free:
                if not s.assign(v, 0):
                    return False
        elif ones + len(free) == self.lb:
            for v in free:
                if not s.assign(v, 1):
                    return False
        return True


class AllEqual(Propagator):
    """An indicator and its member variables all take the same value."""

    def __init__(self, indicator: int, members: Sequence[int]):
        self.indicator = indicator
        self.members = list(members)

    def vars(self):
        return [self.indicator, *self.members]

    def propagate(self, s: Solver) -> bool:
        val = s.value(self.indicator)
        if val == UNASSIGNED:
            for v in self.members:
                mv = s.value(v)
                if mv != UNASSIGNED:
                    val = mv
                    break
            if val == UNASSIGNED:
                return True
            if not s.assign(self.indicator, val):
                return False
        for v in self.members:
            if not s.assign(v, val):
                return False
        return True


class CategorySpan(Propagator):
    """The chosen items touch between lb and ub groups of a partition."""

    def __init__(self, x_vars: Sequence[int | None], groups, lb: int, ub: int):
        self.x_vars = x_vars
        self.groups = [g.members for g in groups]
        self.lb = lb
        self.ub = ub

    def vars(self):
        return [v for v in self.x_vars if v is not None]

    def propagate(self, s: Solver) -> bool:
        x_one = x_poss = 0
        for i, v in enumerate(self.x_vars):
            if v is None:
                continue
            val = s.value(v)
            if val == 1:
                x_one |= 1 << i
                x_poss |= 1 << i
            elif val == UNASSIGNED:
                x_poss |= 1 << i
        touched = reachable = 0
        for g in self.groups:
            if x_one & g:
                touched += 1
                reachable += 1
            elif x_poss & g:
                reachable += 1
        if touched > self.ub or reachable < self.lb:
            return False
        if touched == self.ub:
            # no further group may be entered
            for g in self.groups:
                if x_one & g:
                    continue
                for i in iter_bits(x_poss & g):
                    if not s.assign(self.x_vars[i], 0):
                        return False
        return True


class ExactlyOneGroup(Propagator):
    """Exactly one indicator is 1 and the active transactions equal that
    group's member set; groups may come from several partition levels."""

    def __init__(self, entries: Sequence[tuple[int, int]], v_vars: Sequence[int | None]):
        self.entries = list(entries)  # (indicator var, member bitset)
        self.v_vars = v_vars

    def vars(self):
        out = [b for b, _ in self.entries]
        out.extend(v for v in self.v_vars if v is not None)
        return out

    def propagate(self, s: Solver) -> bool:
        chosen = None
        for b, bits in self.entries:
            if s.value(b) == 1:
                if chosen is not None:
                    return False
                chosen = (b, bits)
        if chosen is not None:
            b, bits = chosen
            for j, v in enumerate(self.v_vars):
                if v is None:
                    continue
                if not s.assign(v, 1 if bits >> j & 1 else 0):
                    return False
            for other, _ in self.entries:
                if other != b and not s.assign(other, 0):
                    return False
            return True
        v_one = v_zero = 0
        for j, v in enumerate(self.v_vars):
            if v is None:
                continue
            val = s.value(v)
            if val == 1:
                v_one |= 1 << j
            elif val == 0:
                v_zero |= 1 << j
        live: list[int] = []
        for b, bits in self.entries:
            if s.value(b) != UNASSIGNED:
                continue
            if (v_one & ~bits) or (v_zero & bits):
                if not s.assign(b, 0):
                    return False
            else:
                live.append(b)
        if not live:
            return False
        if len(live) == 1:
            return s.assign(live[0], 1)
        return True


# ------------------------------------------------ reified mining family


class ReifiedCoverage(Propagator):
    """y_j = 1 iff v_j = 1 and the chosen itemset is contained in row j."""

    def __init__(self, x_vars, v_var: int, y_var: int, row_bits: int, n_items: int):
        self.x_vars = x_vars
        self.v_var = v_var
        self.y_var = y_var
        self.row = row_bits
        self.universe = span_bits(1, n_items)

    def vars(self):
        out = [v for v in self.x_vars if v is not None]
        out.append(self.v_var)
        out.append(self.y_var)
        return out

    def propagate(self, s: Solver) -> bool:
        x_one = x_poss = 0
        for i, v in enumerate(self.x_vars):
            if v is None:
                continue
            val = s.value(v)
            if val == 1:
                x_one |= 1 << i
                x_poss |= 1 << i
            elif val == UNASSIGNED:
                x_poss |= 1 << i
        if x_one & ~self.row:
            return s.assign(self.y_var, 0)
        vv = s.value(self.v_var)
        if vv == 0:
            return s.assign(self.y_var, 0)
        yv = s.value(self.y_var)
        if yv == 1:
            if not s.assign(self.v_var, 1):
                return False
            for i in iter_bits(x_poss & ~self.row):
                if not s.assign(self.x_vars[i], 0):
                    return False
            return True
        if (x_poss & ~self.row) == 0:
            # containment is entailed
            if vv == 1:
                return s.assign(self.y_var, 1)
            if yv == 0:
                return s.assign(self.v_var, 0)
        return True


class FrequencyCheck(Propagator):
    """x_i = 1 implies q * sum(y_j over column i) >= p * sum(v_j).

    Deliberately lazy: it only concludes once every cover variable of the
    item's column and every activation variable is assigned, so the reified
    network does no support-bound guessing.
    """

    def __init__(self, x_var: int, y_vars, v_vars, col_bits: int, p: int, q: int):
        self.x_var = x_var
        self.y_vars = y_vars
        self.v_vars = v_vars
        self.col = col_bits
        self.p = p
        self.q = q

    def vars(self):
        out = [self.x_var]
        out.extend(y for j, y in enumerate(self.y_vars) if y is not None and self.col >> j & 1)
        out.extend(v for v in self.v_vars if v is not None)
        return out

    def entailed(self, s: Solver) -> bool:
        return s.value(self.x_var) == 0

    def propagate(self, s: Solver) -> bool:
        xv = s.value(self.x_var)
        if xv == 0:
            return True
        ones = 0
        for j, y in enumerate(self.y_vars):
            if y is None or not self.col >> j & 1:
                continue
            val = s.value(y)
            if val == UNASSIGNED:
                return True
            ones += val
        active = 0
        for v in self.v_vars:
            if v is None:
                continue
            val = s.value(v)
            if val == UNASSIGNED:
                return True
            active += val
        if self.q * ones >= self.p * active:
            return True
        if xv == 1:
            return False
        return s.assign(self.x_var, 0)


class ClosednessReified(Propagator):
    """For an active item i: x_i = 1 iff no covering transaction misses i."""

    def __init__(self, h_var: int, x_var: int, y_vars, col_bits: int, m_trans: int):
        self.h_var = h_var
        self.x_var = x_var
        self.y_vars = y_vars
        self.col = col_bits
        self.universe = span_bits(1, m_trans)

    def vars(self):
        out = [self.h_var, self.x_var]
        out.extend(y for y in self.y_vars if y is not None)
        return out

    def entailed(self, s: Solver) -> bool:
        return s.value(self.h_var) == 0

    def propagate(self, s: Solver) -> bool:
        hv = s.value(self.h_var)
        if hv != 1:
            return True  # dormant until the item is known active
        y_one = y_nz = 0
        for j, y in enumerate(self.y_vars):
            if y is None:
                continue
            val = s.value(y)
            if val == 1:
                y_one |= 1 << j
                y_nz |= 1 << j
            elif val == UNASSIGNED:
                y_nz |= 1 << j
        outside = self.universe & ~self.col
        xv = s.value(self.x_var)
        if xv == 1:
            for j in iter_bits(y_nz & outside):
                if not s.assign(self.y_vars[j], 0):
                    return False
            return True
        if (y_nz & outside) == 0:
            return s.assign(self.x_var, 1)
        if y_one & outside:
            return s.assign(self.x_var, 0)
        return True


# ------------------------------------------------------------ posting API


def post_channeling(s: Solver, h_vars, x_vars, v_vars, y_vars) -> None:
    """Inactive items leave the itemset; inactive transactions leave the
    cover (x <= h per item, y <= v per transaction)."""
    if len(h_vars) != len(x_vars) or len(v_vars) != len(y_vars):
        raise ValueError("activation/decision vectors must have equal length")
    for h, x in zip(h_vars, x_vars):
        if h is not None:
            s.post(Channel(h, x))
    for v, y in zip(v_vars, y_vars):
        if v is not None:
            s.post(Channel(v, y))


def post_group_activation(
    s: Solver,
    scheme: PartitionScheme,
    axis_vars,
    lb: int,
    ub: int,
    level: int = 0,
) -> list[int]:
    """Each group activates as a whole; the number of active groups lies in
    [lb, ub].  Returns the per-group indicator variables."""
    groups = scheme.levels[level]
    if not 0 <= lb <= ub <= len(groups):
        raise ValueError(f"group activation bounds ({lb},{ub}) invalid for {len(groups)} groups")
    indicators = []
    for g in groups:
        b = s.new_var(ROLE_AUX)
        indicators.append(b)
        s.post(AllEqual(b, [axis_vars[i] for i in iter_bits(g.members)]))
    s.post(CardinalityRange(indicators, lb, ub))
    return indicators


def post_category_span(s: Solver, x_vars, scheme: PartitionScheme, lb: int, ub: int) -> None:
    if scheme.axis != "items":
        raise ValueError("category span is defined over item partitions")
    if not 0 <= lb <= ub:
        raise ValueError(f"span bounds ({lb},{ub}) invalid")
    s.post(CategorySpan(x_vars, scheme.groups, lb, ub))


def post_min_size(s: Solver, x_vars, k: int) -> None:
    n = sum(1 for v in x_vars if v is not None)
    if not 1 <= k <= n:
        raise ValueError(f"minimum size {k} out of range 1..{n}")
    s.post(CardinalityRange([v for v in x_vars if v is not None], k, None))


def post_required_item(s: Solver, x_vars, item: int) -> None:
    if not (1 <= item < len(x_vars)) or x_vars[item] is None:
        raise ValueError(f"no such item: {item}")
    s.assign_root(x_vars[item], 1)


def post_forbidden_items(s: Solver, x_vars, items: int) -> None:
    """Fix x_i = 0 for every item in the ``items`` bitset."""
    for i in iter_bits(items):
        if not (1 <= i < len(x_vars)) or x_vars[i] is None:
            raise ValueError(f"no such item: {i}")
        s.assign_root(x_vars[i], 0)


def post_exactly_one_group(s: Solver, scheme: PartitionScheme, v_vars) -> list[int]:
    """The active transactions equal exactly one group drawn from any level
    of the scheme.  Returns the indicator variables, one per group."""
    if not scheme.levels:
        raise ValueError("scheme has no levels")
    entries = []
    indicators = []
    for level in scheme.levels:
        for g in level:
            b = s.new_var(ROLE_AUX)
            indicators.append(b)
            entries.append((b, g.members))
    s.post(ExactlyOneGroup(entries, v_vars))
    return indicators


def post_reified_fci(
    s: Solver,
    db: TransactionDatabase,
    x_vars,
    y_vars,
    h_vars,
    v_vars,
    theta: Fraction,
    closed: bool = True,
) -> None:
    """The reified mining family: per-transaction coverage, per-item minimum
    frequency, and (optionally) per-item closedness, each ranging over the
    activated part of the data.  Channeling must already be posted."""
    if not 0 < theta <= 1:
        raise ValueError(f"theta must lie in (0,1], got {theta}")
    p, q = theta.numerator, theta.denominator
    n, m = db.item_count, db.transaction_count
    for j in range(1, m + 1):
        s.post(ReifiedCoverage(x_vars, v_vars[j], y_vars[j], db.rows[j], n))
    for i in range(1, n + 1):
        s.post(FrequencyCheck(x_vars[i], y_vars, v_vars, db.columns[i], p, q))
    if closed:
        for i in range(1, n + 1):
            s.post(ClosednessReified(h_vars[i], x_vars[i], y_vars, db.columns[i], m))

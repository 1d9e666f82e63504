"""Tri-state Boolean constraint solver.

Variables hold one of {unassigned, 0, 1}.  Propagators watch variables and
are woken through a FIFO queue with per-propagator dedup until fixpoint.
Backtracking restores the trail to a decision mark; search enumerates every
full assignment accepted by all propagators, exactly once.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Sequence

UNASSIGNED = -1

ROLE_X = "X"  # itemset membership
ROLE_Y = "Y"  # cover membership
ROLE_H = "H"  # item activation (mask)
ROLE_V = "V"  # transaction activation (mask)
ROLE_AUX = "aux"  # group indicators and other auxiliaries

_ROLE_ORDER = {ROLE_AUX: 0, ROLE_H: 1, ROLE_V: 2, ROLE_X: 3, ROLE_Y: 4}
_MASK_ROLES = (ROLE_H, ROLE_V)


class SearchTimeout(Exception):
    """Raised inside search when the caller's stop predicate fires."""


class Propagator:
    """Filtering procedure for one constraint.

    ``propagate`` may assign watched or other variables through the solver
    and must return False exactly when it detects a contradiction.  It must
    be sound (never remove a value that some solution of its constraint
    extends) and idempotent at fixpoint.  ``entailed`` may report that the
    constraint holds in every extension of the current state; entailed
    propagators are skipped when woken.
    """

    def vars(self) -> Iterable[int]:
        raise NotImplementedError

    def propagate(self, s: "Solver") -> bool:
        raise NotImplementedError

    def entailed(self, s: "Solver") -> bool:
        return False


class Solver:
    def __init__(self) -> None:
        self._values: list[int] = []
        self._roles: list[str] = []
        self._watchers: list[list[int]] = []
        self._props: list[Propagator] = []
        self._trail: list[int] = []
        self._marks: list[int] = []
        self._queue: deque[int] = deque()
        self._queued: set[int] = set()
        self._stamps: dict[str, int] = {}
        self._mask_unassigned = 0
        self.root_failed = False
        self.stats = {"nodes": 0, "masks_reached": 0, "solutions": 0}

    # -- variables ----------------------------------------------------------

    def new_var(self, role: str = ROLE_AUX) -> int:
        v = len(self._values)
        self._values.append(UNASSIGNED)
        self._roles.append(role)
        self._watchers.append([])
        if role in _MASK_ROLES:
            self._mask_unassigned += 1
        return v

    def new_vars(self, count: int, role: str) -> list[int]:
        return [self.new_var(role) for _ in range(count)]

    def value(self, v: int) -> int:
        return self._values[v]

    def role(self, v: int) -> str:
        return self._roles[v]

    @property
    def num_vars(self) -> int:
        return len(self._values)

    def stamp(self, role: str) -> int:
        """Monotone counter bumped whenever a variable of ``role`` changes."""
        return self._stamps.get(role, 0)

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self._values)

    # -- assignment and trail -------------------------------------------------

    def assign(self, v: int, val: int) -> bool:
        """Assign v := val; False iff v already holds the opposite value."""
        cur = self._values[v]
        if cur == val:
            return True
        if cur != UNASSIGNED:
            return False
        self._values[v] = val
        self._trail.append(v)
        role = self._roles[v]
        self._stamps[role] = self._stamps.get(role, 0) + 1
        if role in _MASK_ROLES:
            self._mask_unassigned -= 1
            if self._mask_unassigned == 0:
                self.stats["masks_reached"] += 1
        for pid in self._watchers[v]:
            if pid not in self._queued:
                self._queued.add(pid)
                self._queue.append(pid)
        return True

    def push_level(self) -> None:
        self._marks.append(len(self._trail))

    def pop_level(self) -> None:
        mark = self._marks.pop()
        while len(self._trail) > mark:
            v = self._trail.pop()
            self._values[v] = UNASSIGNED
            role = self._roles[v]
            self._stamps[role] = self._stamps.get(role, 0) + 1
            if role in _MASK_ROLES:
                self._mask_unassigned += 1
        self._queue.clear()
        self._queued.clear()

    # -- propagation ----------------------------------------------------------

    def post(self, prop: Propagator) -> int:
        """Register a propagator and run its initial filtering at the root.

        A root-level contradiction sets ``root_failed`` instead of raising.
        """
        watched = list(prop.vars())
        for v in watched:
            if not 0 <= v < len(self._values):
                raise ValueError(f"propagator watches unknown variable {v}")
        pid = len(self._props)
        self._props.append(prop)
        for v in watched:
            self._watchers[v].append(pid)
        if not self.root_failed:
            self._queued.add(pid)
            self._queue.append(pid)
            if not self.propagate_to_fixpoint():
                self.root_failed = True
        return pid

    def assign_root(self, v: int, val: int) -> bool:
        """Assign at the root and propagate; records root failure."""
        if self.root_failed:
            return False
        if not (self.assign(v, val) and self.propagate_to_fixpoint()):
            self.root_failed = True
            return False
        return True

    def propagate_to_fixpoint(self) -> bool:
        queue = self._queue
        queued = self._queued
        props = self._props
        while queue:
            pid = queue.popleft()
            queued.discard(pid)
            prop = props[pid]
            if prop.entailed(self):
                continue
            if not prop.propagate(self):
                queue.clear()
                queued.clear()
                return False
        return True

    # -- search -----------------------------------------------------------------

    def default_order(self) -> list[int]:
        """Dataset-first branching: auxiliaries, then H, V, then X, then Y."""
        return sorted(
            range(len(self._values)),
            key=lambda v: (_ROLE_ORDER.get(self._roles[v], 9), v),
        )

    def search_all(
        self,
        on_solution: Callable[[tuple[int, ...]], None] | None = None,
        order: Sequence[int] | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> int:
        """Exhaustive DFS over all full assignments accepted by every
        propagator.  Value 1 is tried before 0.  Returns the solution count;
        the sink sees each solution exactly once.  Iterative, so the depth
        is bounded by memory, not the interpreter's recursion limit."""
        if self.root_failed:
            return 0
        branch = list(order) if order is not None else self.default_order()
        values = self._values
        nb = len(branch)
        count = 0

        def next_unassigned(start: int) -> int:
            i = start
            while i < nb and values[branch[i]] != UNASSIGNED:
                i += 1
            return i

        def emit() -> None:
            nonlocal count
            snap = self.snapshot()
            if UNASSIGNED in snap:
                raise ValueError("branching order must cover all variables")
            count += 1
            self.stats["solutions"] += 1
            if on_solution is not None:
                on_solution(snap)

        start = next_unassigned(0)
        if start == nb:
            emit()
            return count
        # one frame per decision variable; a frame's parent keeps the level
        # of its successful assignment open until the frame is exhausted
        frames: list[list[int]] = [[start, 0]]
        while frames:
            frame = frames[-1]
            pos, tried = frame
            if tried == 2:
                frames.pop()
                if frames:
                    self.pop_level()
                continue
            if should_stop is not None and should_stop():
                raise SearchTimeout
            frame[1] += 1
            val = 1 if tried == 0 else 0
            self.push_level()
            self.stats["nodes"] += 1
            if self.assign(branch[pos], val) and self.propagate_to_fixpoint():
                nxt = next_unassigned(pos + 1)
                if nxt == nb:
                    emit()
                    self.pop_level()
                else:
                    frames.append([nxt, 0])
            else:
                self.pop_level()
        return count

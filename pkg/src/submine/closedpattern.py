"""Global frequent(-closed) itemset propagators over a circumscribed
sub-dataset.

``ClosedPatternSub`` filters the itemset variables directly from bitset
covers instead of going through the reified decomposition; it accepts
exactly the same full assignments.  Once the mask (H, V) is fully assigned
it applies, over the cover of the current positive items restricted to the
active transactions and the not-yet-excluded cover variables:

  * fail when that cover cannot reach the support threshold;
  * drop a free item whose addition kills the threshold;
  * (closed mode) force a free active item whose addition leaves the cover
    unchanged;
  * (closed mode) drop a free active item dominated by an excluded one,
    and fail when the cover is contained in an excluded item's column.

While the mask is only partially assigned it runs relaxed, always-sound
bounds: an optimistic cover over possibly-active transactions against the
count of definitely-active ones.  Cover state is recomputed from the column
bitsets on wake-up; per-role change stamps keep the rebuild work small.
"""

from __future__ import annotations

from fractions import Fraction

from .dataset import TransactionDatabase, span_bits
from .engine import ROLE_H, ROLE_V, ROLE_X, ROLE_Y, UNASSIGNED, Propagator, Solver


class ClosedPatternSub(Propagator):
    def __init__(
        self,
        db: TransactionDatabase,
        x_vars,
        h_vars,
        y_vars,
        v_vars,
        theta: Fraction,
        closed: bool = True,
    ):
        if not 0 < theta <= 1:
            raise ValueError(f"theta must lie in (0,1], got {theta}")
        self.db = db
        self.x_vars = x_vars
        self.h_vars = h_vars
        self.y_vars = y_vars
        self.v_vars = v_vars
        self.p = theta.numerator
        self.q = theta.denominator
        self.closed = closed
        self.n = db.item_count
        self.m = db.transaction_count
        self.item_universe = span_bits(1, self.n)
        self.trans_universe = span_bits(1, self.m)
        self._stamp_x = self._stamp_h = self._stamp_v = self._stamp_y = -1
        self._x1 = self._xnz = 0
        self._h1 = self._hnz = 0
        self._h_done = False
        self._v1 = self._vnz = 0
        self._v_done = False
        self._y1 = self._ynz = 0

    def vars(self):
        out = []
        for vs in (self.x_vars, self.h_vars, self.y_vars, self.v_vars):
            out.extend(v for v in vs if v is not None)
        return out

    def _refresh(self, s: Solver) -> None:
        st = s.stamp(ROLE_X)
        if st != self._stamp_x:
            self._stamp_x = st
            one = nz = 0
            for i in range(1, self.n + 1):
                val = s.value(self.x_vars[i])
                if val == 1:
                    one |= 1 << i
                    nz |= 1 << i
                elif val == UNASSIGNED:
                    nz |= 1 << i
            self._x1, self._xnz = one, nz
        st = s.stamp(ROLE_H)
        if st != self._stamp_h:
            self._stamp_h = st
            one = nz = 0
            done = True
            for i in range(1, self.n + 1):
                val = s.value(self.h_vars[i])
                if val == 1:
                    one |= 1 << i
                    nz |= 1 << i
                elif val == UNASSIGNED:
                    nz |= 1 << i
                    done = False
            self._h1, self._hnz, self._h_done = one, nz, done
        st = s.stamp(ROLE_V)
        if st != self._stamp_v:
            self._stamp_v = st
            one = nz = 0
            done = True
            for j in range(1, self.m + 1):
                val = s.value(self.v_vars[j])
                if val == 1:
                    one |= 1 << j
                    nz |= 1 << j
                elif val == UNASSIGNED:
                    nz |= 1 << j
                    done = False
            self._v1, self._vnz, self._v_done = one, nz, done
        st = s.stamp(ROLE_Y)
        if st != self._stamp_y:
            self._stamp_y = st
            one = nz = 0
            for j in range(1, self.m + 1):
                val = s.value(self.y_vars[j])
                if val == 1:
                    one |= 1 << j
                    nz |= 1 << j
                elif val == UNASSIGNED:
                    nz |= 1 << j
            self._y1, self._ynz = one, nz

    def propagate(self, s: Solver) -> bool:
        self._refresh(s)
        cols = self.db.columns
        rows = self.db.rows
        p, q = self.p, self.q
        x1, xnz = self._x1, self._xnz
        x_vars = self.x_vars

        # items ruled out by transactions already committed to the cover
        if self._y1:
            allowed = self.item_universe
            y1 = self._y1
            while y1:
                low = y1 & -y1
                allowed &= rows[low.bit_length() - 1]
                y1 ^= low
            bad = xnz & ~allowed
            while bad:
                low = bad & -bad
                if not s.assign(x_vars[low.bit_length() - 1], 0):
                    return False
                bad ^= low
            xnz &= allowed | x1

        sigma_cover = self.trans_universe
        rest = x1
        while rest:
            low = rest & -rest
            sigma_cover &= cols[low.bit_length() - 1]
            rest ^= low

        if self._h_done and self._v_done:
            act = self._v1
            n_act = act.bit_count()
            need = p * n_act
            cov = sigma_cover & act & self._ynz
            if q * cov.bit_count() < need:
                return False
            h1 = self._h1
            free = xnz & ~x1
            fr = free
            while fr:
                low = fr & -fr
                fr ^= low
                i = low.bit_length() - 1
                ci = cov & cols[i]
                if q * ci.bit_count() < need:
                    if not s.assign(x_vars[i], 0):
                        return False
                    free ^= low
                elif self.closed and h1 & low and (cov & ~cols[i]) == 0:
                    if not s.assign(x_vars[i], 1):
                        return False
                    free ^= low
            if self.closed:
                excluded = self.item_universe & ~xnz & h1
                if excluded:
                    zs = []
                    ex = excluded
                    while ex:
                        low = ex & -ex
                        ex ^= low
                        z = cov & ~cols[low.bit_length() - 1]
                        if z == 0:
                            return False
                        zs.append(z)
                    fr = free & h1
                    while fr:
                        low = fr & -fr
                        fr ^= low
                        i = low.bit_length() - 1
                        ci = cols[i]
                        for z in zs:
                            if z & ci == 0:
                                if not s.assign(x_vars[i], 0):
                                    return False
                                break
        else:
            floor = p * self._v1.bit_count()
            ub_cov = sigma_cover & self._vnz & self._ynz
            if q * ub_cov.bit_count() < floor:
                return False
            fr = xnz & ~x1
            while fr:
                low = fr & -fr
                fr ^= low
                i = low.bit_length() - 1
                if q * (ub_cov & cols[i]).bit_count() < floor:
                    if not s.assign(x_vars[i], 0):
                        return False

        # cover variables follow the itemset and the mask
        y_vars = self.y_vars
        v_vars = self.v_vars
        for j in range(1, self.m + 1):
            vv = s.value(v_vars[j])
            if vv == 0:
                if not s.assign(y_vars[j], 0):
                    return False
                continue
            rj = rows[j]
            if x1 & ~rj:
                if not s.assign(y_vars[j], 0):
                    return False
            elif vv == 1 and (xnz & ~rj) == 0:
                if not s.assign(y_vars[j], 1):
                    return False
        return True


def post_closed_pattern_sub(
    s: Solver,
    db: TransactionDatabase,
    x_vars,
    h_vars,
    y_vars,
    v_vars,
    theta: Fraction,
) -> int:
    """Frequent-closed mining confined to the (H, V) sub-dataset."""
    return s.post(ClosedPatternSub(db, x_vars, h_vars, y_vars, v_vars, theta, closed=True))


def post_frequent_sub(
    s: Solver,
    db: TransactionDatabase,
    x_vars,
    h_vars,
    y_vars,
    v_vars,
    theta: Fraction,
) -> int:
    """Frequent mining confined to the (H, V) sub-dataset; no closedness."""
    return s.post(ClosedPatternSub(db, x_vars, h_vars, y_vars, v_vars, theta, closed=False))

"""Shared builders for the running-example dataset and synthetic instances."""

from fractions import Fraction

from submine import PartitionScheme, TransactionDatabase
from submine.dataset import bits_of, iter_bits

# running example: 9 items A..K (no I/J) mapped to 1..9, 6 transactions
A, B, C, D, E, F, G, H, K = range(1, 10)
ITEM_LABELS = dict(zip(range(1, 10), "A B C D E F G H K".split()))

TABLE1_ROWS = [
    [B, C, G, H, K],  # t1
    [A, D, G, K],     # t2
    [A, C, D, H],     # t3
    [A, E, F],        # t4
    [B, E, F],        # t5
    [B, E, F, G, K],  # t6
]

TABLE1_FIMI = "\n".join(" ".join(str(i) for i in row) for row in TABLE1_ROWS) + "\n"

HALF = Fraction(1, 2)


def table1_db() -> TransactionDatabase:
    return TransactionDatabase.from_rows(TABLE1_ROWS, item_labels=ITEM_LABELS)


def table1_item_scheme() -> PartitionScheme:
    return PartitionScheme.build(
        "items", 9, [("I1", [A, B]), ("I2", [C, D, E]), ("I3", [F, G, H, K])]
    )


def table1_trans_scheme() -> PartitionScheme:
    return PartitionScheme.build(
        "transactions", 6, [("T1", [1, 2]), ("T2", [3, 4]), ("T3", [5, 6])]
    )


def theory_labels(pairs) -> set:
    """(item mask, trans mask, joined labels, support) per pair."""
    return {(p.item_mask, p.trans_mask, "".join(p.labels), p.support) for p in pairs}


def car_purchases():
    """Synthetic car-purchase data: 2 regions x 2 departments x 2 cities,
    5 purchases per city.  One Ferrari is planted in city 1, which puts
    exactly two administrative entities at or above 10% Ferrari frequency:
    City1 (1/5) and Dep1 (1/10, met exactly)."""
    brands = {1: "Ferrari", 2: "Renault", 3: "Peugeot", 4: "Fiat", 5: "VW"}
    rows = []
    tid = 0
    city_idx = 0
    for reg in range(2):
        for dep in range(2):
            for _city in range(2):
                city_idx += 1
                for k in range(5):
                    tid += 1
                    brand = 1 if (city_idx == 1 and k == 0) else 2 + (tid % 4)
                    rows.append(
                        [brand, 5 + city_idx, 13 + (reg * 2 + dep + 1), 17 + reg + 1]
                    )
    labels = dict(brands)
    for c in range(1, 9):
        labels[5 + c] = f"city{c}"
    for d in range(1, 5):
        labels[13 + d] = f"dep{d}"
    for r in range(1, 3):
        labels[17 + r] = f"reg{r}"
    db = TransactionDatabase.from_rows(rows, item_labels=labels)
    regions = [("Reg1", list(range(1, 21))), ("Reg2", list(range(21, 41)))]
    depts = [(f"Dep{d}", list(range(1 + (d - 1) * 10, 1 + d * 10))) for d in range(1, 5)]
    cities = [(f"City{c}", list(range(1 + (c - 1) * 5, 1 + c * 5))) for c in range(1, 9)]
    scheme = PartitionScheme.build(
        "transactions", 40, regions, extra_levels=[depts, cities]
    )
    return db, scheme


FERRARI = 1
FERRARI_BITS = bits_of([FERRARI])


# ------------------------------------------------------------------------
# Machinery for checking the global propagator against the reified
# decomposition on random partial states with a fully assigned mask.

from submine.closedpattern import post_closed_pattern_sub, post_frequent_sub
from submine.constraints import post_channeling, post_reified_fci
from submine.dataset import span_bits
from submine.engine import ROLE_H, ROLE_V, ROLE_X, ROLE_Y, UNASSIGNED, Solver


def build_mining_solver(db, theta, closed, reified):
    s = Solver()
    n, m = db.item_count, db.transaction_count
    h = [None] + s.new_vars(n, ROLE_H)
    v = [None] + s.new_vars(m, ROLE_V)
    x = [None] + s.new_vars(n, ROLE_X)
    y = [None] + s.new_vars(m, ROLE_Y)
    post_channeling(s, h[1:], x[1:], v[1:], y[1:])
    if reified:
        post_reified_fci(s, db, x, y, h, v, theta, closed=closed)
    elif closed:
        post_closed_pattern_sub(s, db, x, h, y, v, theta)
    else:
        post_frequent_sub(s, db, x, h, y, v, theta)
    return s, (x, y, h, v)


def random_mask_state(rng, n, m):
    """A fully assigned mask plus a random partial assignment of X and Y."""
    h_bits = bits_of([i for i in range(1, n + 1) if rng.random() < 0.8])
    v_bits = bits_of([j for j in range(1, m + 1) if rng.random() < 0.8])
    x_state = {
        i: rng.randint(0, 1) for i in range(1, n + 1) if rng.random() < 0.3
    }
    y_state = {
        j: rng.randint(0, 1) for j in range(1, m + 1) if rng.random() < 0.3
    }
    return h_bits, v_bits, x_state, y_state


def apply_state(s, handles, db, h_bits, v_bits, x_state, y_state):
    """Load the state without intermediate propagation, then run one
    fixpoint.  Returns (ok, fixed) where fixed maps ('x', i)/('y', j) to the
    value the solver holds at fixpoint."""
    x, y, h, v = handles
    n, m = db.item_count, db.transaction_count
    for i in range(1, n + 1):
        assert s.assign(h[i], h_bits >> i & 1)
    for j in range(1, m + 1):
        assert s.assign(v[j], v_bits >> j & 1)
    for i, val in x_state.items():
        assert s.assign(x[i], val)
    for j, val in y_state.items():
        assert s.assign(y[j], val)
    if not s.propagate_to_fixpoint():
        return False, {}
    fixed = {}
    for i in range(1, n + 1):
        if s.value(x[i]) != UNASSIGNED:
            fixed[("x", i)] = s.value(x[i])
    for j in range(1, m + 1):
        if s.value(y[j]) != UNASSIGNED:
            fixed[("y", j)] = s.value(y[j])
    return True, fixed


def mining_extensions(db, theta, closed, h_bits, v_bits, x_state, y_state):
    """All full assignments extending the state that satisfy the mining
    semantics by definition (channeling, coverage, frequency, closedness)."""
    n, m = db.item_count, db.transaction_count
    p, q = theta.numerator, theta.denominator
    n_act = v_bits.bit_count()
    universe_t = span_bits(1, m)
    free = [i for i in range(1, n + 1) if i not in x_state]
    out = []
    base = bits_of([i for i, val in x_state.items() if val == 1])
    for sel in range(1 << len(free)):
        xbits = base
        for k, i in enumerate(free):
            if sel >> k & 1:
                xbits |= 1 << i
        if xbits & ~h_bits:
            continue  # channeling
        ybits = 0
        ok = True
        for j in range(1, m + 1):
            yj = 1 if (v_bits >> j & 1) and not (xbits & ~db.rows[j]) else 0
            if j in y_state and y_state[j] != yj:
                ok = False
                break
            ybits |= yj << j
        if not ok:
            continue
        for i in iter_bits(xbits):
            if q * (ybits & db.columns[i]).bit_count() < p * n_act:
                ok = False
                break
        if ok and closed:
            for i in iter_bits(h_bits):
                covered = (ybits & ~db.columns[i] & universe_t) == 0
                if bool(xbits >> i & 1) != covered:
                    ok = False
                    break
        if ok:
            out.append((xbits, ybits))
    return out

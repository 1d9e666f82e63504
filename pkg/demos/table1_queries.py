"""Walk through the query families on a small 9-item, 6-transaction
dataset with three item categories and three customer categories.

Run with:  python3 demos/table1_queries.py
"""

from fractions import Fraction

from submine import PartitionScheme, Query, TransactionDatabase, run_theory
from submine.dataset import bits_of
from submine.queries import AxisConstraint

A, B, C, D, E, F, G, H, K = range(1, 10)

db = TransactionDatabase.from_rows(
    [
        [B, C, G, H, K],
        [A, D, G, K],
        [A, C, D, H],
        [A, E, F],
        [B, E, F],
        [B, E, F, G, K],
    ],
    item_labels=dict(zip(range(1, 10), "A B C D E F G H K".split())),
)
items = PartitionScheme.build(
    "items", 9, [("I1", [A, B]), ("I2", [C, D, E]), ("I3", [F, G, H, K])]
)
trans = PartitionScheme.build(
    "transactions", 6, [("T1", [1, 2]), ("T2", [3, 4]), ("T3", [5, 6])]
)

half = Fraction(1, 2)


def show(title, query):
    print(f"\n== {title}")
    for p in run_theory(db, query, items, trans):
        print(f"  items={p.item_desc:7s} trans={p.trans_desc:7s} "
              f"{' '.join(p.labels):8s} support={p.support} freq={p.freq_str()}")


# Constraints on itemsets only: plain frequent closed itemset mining.
show("Q1: FCIs at 50%", Query(theta=half))

# Still the whole dataset, but the itemset must straddle two categories.
show("Q1': FCIs spanning exactly 2 item categories", Query(theta=half, span=(2, 2)))

# Constraints on the dataset itself: mine inside every sub-dataset built
# from exactly two item categories.
show("Q2: FCIs on 2 of 3 item categories",
     Query(theta=half, items=AxisConstraint.group_bounds(2, 2)))

# Same idea on the transaction side.
show("Q3: FCIs on 2 of 3 customer categories",
     Query(theta=half, trans=AxisConstraint.group_bounds(2, 2)))

# Both sides at once: nine sub-datasets to explore.
show("Q4: both bounds at 2",
     Query(theta=half,
           items=AxisConstraint.group_bounds(2, 2),
           trans=AxisConstraint.group_bounds(2, 2)))

# Excluding items interacts badly with closedness on the full dataset:
# BG is not closed there because K covers the same transactions.  Dropping
# the K column from the sub-dataset makes BG closed and recoverable.
show("size-2 itemsets at 30% avoiding C,D,E,F with K deactivated",
     Query(theta=Fraction(3, 10), min_size=2,
           forbid=bits_of([C, D, E, F]),
           items=AxisConstraint.fixed(bits_of([A, B, C, D, E, F, G, H]))))

"""Where are Ferrari cars frequently bought?

Purchases carry the city, department, and region where they happened; the
three administrative levels partition the transactions.  The query asks
for the entities (any level) where at least 10% of purchases are Ferrari
cars: the dataset part picks exactly one entity as the active sub-dataset,
the mining part is plain frequent-itemset search with Ferrari required.

Run with:  python3 demos/where_frequent.py
"""

import random
from fractions import Fraction

from submine import PartitionScheme, Query, TransactionDatabase, run_theory
from submine.dataset import bits_of
from submine.queries import AxisConstraint

rng = random.Random(5)

BRANDS = ["Ferrari", "Renault", "Peugeot", "Fiat", "VW"]
N_REGIONS, N_DEPTS, N_CITIES, PER_CITY = 2, 2, 2, 5

rows, labels = [], {}
for i, name in enumerate(BRANDS, start=1):
    labels[i] = name
city = 0
for reg in range(N_REGIONS):
    for dep in range(N_DEPTS):
        for _ in range(N_CITIES):
            city += 1
            labels[5 + city] = f"city{city}"
            for k in range(PER_CITY):
                # plant a Ferrari purchase in the first city only
                brand = 1 if city == 1 and k == 0 else rng.randint(2, 5)
                rows.append([brand, 5 + city])

db = TransactionDatabase.from_rows(rows, item_labels=labels)

per_city = PER_CITY
per_dept = per_city * N_CITIES
per_reg = per_dept * N_DEPTS
regions = [(f"Reg{r+1}", list(range(1 + r * per_reg, 1 + (r + 1) * per_reg)))
           for r in range(N_REGIONS)]
depts = [(f"Dep{d+1}", list(range(1 + d * per_dept, 1 + (d + 1) * per_dept)))
         for d in range(N_REGIONS * N_DEPTS)]
cities = [(f"City{c+1}", list(range(1 + c * per_city, 1 + (c + 1) * per_city)))
          for c in range(N_REGIONS * N_DEPTS * N_CITIES)]
places = PartitionScheme.build("transactions", len(rows), regions,
                               extra_levels=[depts, cities])

ferrari = bits_of([1])
query = Query(
    theta=Fraction(1, 10),
    closed=False,
    require=ferrari,
    items=AxisConstraint.fixed(ferrari),   # only the Ferrari column is mined
    trans=AxisConstraint.one_per_level(),  # one region, department, or city
)

print(f"{len(rows)} purchases over "
      f"{N_REGIONS} regions / {N_REGIONS*N_DEPTS} departments / "
      f"{N_REGIONS*N_DEPTS*N_CITIES} cities\n")
theory = run_theory(db, query, None, places)
if not theory:
    print("no entity reaches 10% Ferrari purchases")
for p in theory:
    print(f"{p.trans_desc:8s} {p.freq_str():>6s} of purchases are Ferrari")

import random
from fractions import Fraction

import pytest

from helpers import A, B, C, D, E, F, G, H, K, TABLE1_FIMI
from submine.dataset import (
    EmptyDatabaseError,
    FormatError,
    Mask,
    PartitionScheme,
    TransactionDatabase,
    bits_of,
    closure,
    cover,
    frequency,
    indices_of,
    parse_fimi,
    parse_labels,
    parse_partition,
)


# ----------------------------------------------------------- FIMI parsing


def test_parse_fimi_minimal():
    db = parse_fimi("1 3\n2 3\n")
    assert db.item_count == 3
    assert db.transaction_count == 2
    assert indices_of(db.column(3)) == (1, 2)


def test_parse_fimi_table1():
    db = parse_fimi(TABLE1_FIMI)
    assert db.item_count == 9
    assert db.transaction_count == 6
    assert indices_of(db.row(1)) == (B, C, G, H, K)


def test_parse_fimi_blank_lines_and_duplicates():
    db = parse_fimi("\n1 1 2\n\n2\n\n")
    assert db.transaction_count == 2
    assert indices_of(db.row(1)) == (1, 2)


def test_parse_fimi_bad_token():
    with pytest.raises(FormatError, match="line 1"):
        parse_fimi("1 x\n")


def test_parse_fimi_nonpositive_id():
    with pytest.raises(FormatError, match="positive"):
        parse_fimi("1 0\n")


def test_parse_fimi_empty():
    with pytest.raises(EmptyDatabaseError):
        parse_fimi("\n\n")


def test_parse_labels():
    labels = parse_labels("# brands\n1 Ferrari\n2 Alfa Romeo\n")
    assert labels == {1: "Ferrari", 2: "Alfa Romeo"}
    with pytest.raises(FormatError):
        parse_labels("x Ferrari\n")


# ------------------------------------------------------ partition parsing


def test_parse_partition_table1(db1):
    text = "# product categories\nI1: 1 2\nI2: 3 4 5\nI3: 6 7 8 9\n"
    scheme = parse_partition(text, db1, "items")
    assert [g.size() for g in scheme.groups] == [2, 3, 4]
    assert [g.name for g in scheme.groups] == ["I1", "I2", "I3"]


def test_parse_partition_completion(db1):
    # item 9 never mentioned: becomes an implicit singleton group
    scheme = parse_partition("I1: 1 2\nI2: 3 4 5\nI3: 6 7 8\n", db1, "items")
    assert len(scheme.groups) == 4
    assert scheme.groups[3].members == bits_of([9])


def test_parse_partition_overlap(db1):
    with pytest.raises(FormatError, match="overlap|already"):
        parse_partition("G1: 1\nG2: 1\n", db1, "items")


def test_parse_partition_out_of_range(db1):
    with pytest.raises(FormatError, match="out of range"):
        parse_partition("G1: 1 99\n", db1, "items")


def test_parse_partition_levels(db1):
    text = "level 1\nL: 1 2 3\nR: 4 5 6\nlevel 2\na: 1 2\nb: 3 4\nc: 5 6\n"
    scheme = parse_partition(text, db1, "transactions")
    assert len(scheme.levels) == 2
    assert [g.name for g in scheme.levels[0]] == ["L", "R"]
    assert [g.name for g in scheme.levels[1]] == ["a", "b", "c"]


def test_scheme_build_rejects_overlap():
    with pytest.raises(ValueError):
        PartitionScheme.build("items", 3, [("g1", [1, 2]), ("g2", [2, 3])])


# ------------------------------------------------- cover/frequency/closure


def test_cover_examples(db1):
    full = db1.full_mask()
    assert indices_of(cover(db1, bits_of([G, K]), full)) == (1, 2, 6)
    assert cover(db1, 0, full) == db1.all_transactions()
    sub = Mask(db1.all_items(), bits_of([1, 2, 3, 4]))
    assert indices_of(cover(db1, bits_of([A, D]), sub)) == (2, 3)


def test_cover_requires_active_items(db1):
    mask = Mask(bits_of([A, B]), db1.all_transactions())
    with pytest.raises(ValueError, match="not active"):
        cover(db1, bits_of([G]), mask)


def test_frequency_examples(db1):
    full = db1.full_mask()
    assert frequency(db1, bits_of([A]), full) == Fraction(3, 6)
    assert frequency(db1, 0, full) == 1
    assert frequency(db1, 0, Mask(db1.all_items(), bits_of([2, 5]))) == 1
    # derived by intersecting rows of the table: B and G share t1, t6
    assert frequency(db1, bits_of([B, G]), full) == Fraction(2, 6)


def test_frequency_no_active_transactions(db1):
    with pytest.raises(ValueError, match="undefined"):
        frequency(db1, bits_of([A]), Mask(db1.all_items(), 0))


def test_closure_examples(db1):
    full = db1.full_mask()
    # G appears in t1, t2, t6 which also all contain K
    assert closure(db1, bits_of([G]), full) == bits_of([G, K])
    # EF is already closed on the full dataset
    assert closure(db1, bits_of([E, F]), full) == bits_of([E, F])
    # with K deactivated, BG is closed in the sub-dataset
    no_k = Mask(bits_of(range(1, 9)), db1.all_transactions())
    assert closure(db1, bits_of([B, G]), no_k) == bits_of([B, G])


def test_closure_empty_cover(db1):
    with pytest.raises(ValueError, match="empty cover"):
        closure(db1, bits_of([A, B]), db1.full_mask())  # A and B never co-occur


# ------------------------------------------------------------- properties


def _random_db(rng):
    n = rng.randint(2, 8)
    m = rng.randint(1, 8)
    rows = [[i for i in range(1, n + 1) if rng.random() < 0.5] for _ in range(m)]
    return TransactionDatabase.from_rows(rows, item_count=n)


def _random_mask(rng, db):
    items = bits_of([i for i in range(1, db.item_count + 1) if rng.random() < 0.8])
    trans = bits_of(
        [j for j in range(1, db.transaction_count + 1) if rng.random() < 0.8]
    )
    return Mask(items, trans)


def test_transpose_consistency():
    rng = random.Random(7)
    for _ in range(50):
        db = _random_db(rng)
        for i in range(1, db.item_count + 1):
            for j in range(1, db.transaction_count + 1):
                assert bool(db.column(i) >> j & 1) == bool(db.row(j) >> i & 1)


def test_cover_antitone():
    rng = random.Random(8)
    for _ in range(100):
        db = _random_db(rng)
        mask = _random_mask(rng, db)
        small = bits_of([i for i in range(1, db.item_count + 1) if rng.random() < 0.3])
        big = small | bits_of(
            [i for i in range(1, db.item_count + 1) if rng.random() < 0.3]
        )
        small &= mask.active_items
        big = (big & mask.active_items) | small
        assert cover(db, big, mask) & ~cover(db, small, mask) == 0


def test_closure_extensive_idempotent_monotone():
    rng = random.Random(9)
    checked = 0
    while checked < 100:
        db = _random_db(rng)
        mask = _random_mask(rng, db)
        pat = mask.active_items & bits_of(
            [i for i in range(1, db.item_count + 1) if rng.random() < 0.3]
        )
        if not cover(db, pat, mask):
            continue
        checked += 1
        cl = closure(db, pat, mask)
        assert cl & ~mask.active_items == 0
        assert pat & ~cl == 0  # extensive
        assert closure(db, cl, mask) == cl  # idempotent
        # shrinking the active items shrinks the closure pointwise
        smaller = Mask(
            mask.active_items & ~(1 << rng.randint(1, db.item_count)),
            mask.active_transactions,
        )
        if pat & ~smaller.active_items == 0:
            assert closure(db, pat, smaller) == cl & smaller.active_items


def test_mask_monotonicity_cover():
    rng = random.Random(10)
    for _ in range(100):
        db = _random_db(rng)
        mask = _random_mask(rng, db)
        pat = mask.active_items & bits_of(
            [i for i in range(1, db.item_count + 1) if rng.random() < 0.3]
        )
        drop = 1 << rng.randint(1, db.transaction_count)
        shrunk = Mask(mask.active_items, mask.active_transactions & ~drop)
        assert cover(db, pat, shrunk) & ~cover(db, pat, mask) == 0

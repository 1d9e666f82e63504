from fractions import Fraction

import pytest

from helpers import A, B, E, F, G, HALF, K, theory_labels
from submine import Query, QueryError, assemble, build_query, parse_query, run_theory
from submine.dataset import bits_of
from submine.queries import AxisConstraint, SolutionPair, describe_mask, validate_pair


# ----------------------------------------------------------------- grammar


def test_parse_query_roundtrip(db1, items3, trans3):
    text = """
    # frequent closed itemsets over two item categories
    theta: 50%
    closed: true
    minsize: 2
    items_active: 2 2
    trans_active: all
    engine: baseline
    """
    q = build_query(parse_query(text), db1, items3, trans3)
    assert q.theta == HALF
    assert q.min_size == 2
    assert q.items == AxisConstraint.group_bounds(2, 2)
    assert q.trans == AxisConstraint.all_active()
    assert q.engine == "baseline"


@pytest.mark.parametrize("text,msg", [
    ("theta: 1/2\nfoo: 1\n", "unknown key"),
    ("theta: 1/2\ntheta: 1/3\n", "duplicate"),
    ("closed: true\n", "missing required key"),
    ("theta: 0\n", "theta"),
    ("theta: 3/2\n", "theta"),
    ("theta: huh\n", "frequency"),
    ("theta: 1/2\nclosed: maybe\n", "closed"),
    ("theta: 1/2\nminsize: zero\n", "minsize"),
])
def test_parse_query_rejects(text, msg, db1):
    with pytest.raises(QueryError, match=msg):
        build_query(parse_query(text), db1)


def test_theta_forms(db1):
    for text in ("1/2", "50%", "0.5"):
        q = build_query({"theta": text}, db1)
        assert q.theta == HALF


def test_labels_resolve(db1):
    q = build_query({"theta": "1/2", "require": "G K", "forbid": "C"}, db1)
    assert q.require == bits_of([G, K])
    assert q.forbid == bits_of([3])
    with pytest.raises(QueryError, match="unknown item label"):
        build_query({"theta": "1/2", "require": "Z"}, db1)


def test_items_parse_as_ids_without_labels():
    from submine import TransactionDatabase

    db = TransactionDatabase.from_rows([[1, 2], [2, 3]], item_count=3)
    q = build_query({"theta": "1/2", "require": "3", "items_active": "list 1 3"}, db)
    assert q.require == bits_of([3])
    assert q.items == AxisConstraint.fixed(bits_of([1, 3]))


def test_bounds_validation(db1, items3, trans3):
    with pytest.raises(QueryError, match="bounds"):
        build_query({"theta": "1/2", "items_active": "2 5"}, db1, items3)
    with pytest.raises(QueryError, match="scheme"):
        build_query({"theta": "1/2", "items_active": "1 2"}, db1, None)
    with pytest.raises(QueryError, match="span"):
        build_query({"theta": "1/2", "span": "0 9"}, db1, items3)
    with pytest.raises(QueryError, match="one-of-levels"):
        build_query({"theta": "1/2", "trans_active": "one-of-levels"}, db1, items3, None)


def test_require_conflicts_forbid(db1):
    with pytest.raises(QueryError, match="required and forbidden"):
        Query(theta=HALF, require=bits_of([A]), forbid=bits_of([A]))


# ---------------------------------------------------------------- assembly


def test_q1_fixes_all_activations(db1):
    solver, layout = assemble(db1, Query(theta=HALF))
    fixed = [solver.value(layout.h[i]) for i in range(1, 10)]
    fixed += [solver.value(layout.v[j]) for j in range(1, 7)]
    assert fixed == [1] * 15  # 9 items + 6 transactions


def test_q1_search_visits_each_solution_once(db1):
    solver, _ = assemble(db1, Query(theta=HALF))
    seen = []
    count = solver.search_all(on_solution=seen.append)
    assert count == 4
    assert len(set(seen)) == 4


def test_q4_candidate_masks(db1, items3, trans3):
    from submine.reference import enumerate_masks

    q = Query(
        theta=HALF,
        items=AxisConstraint.group_bounds(2, 2),
        trans=AxisConstraint.group_bounds(2, 2),
    )
    assert enumerate_masks(db1, q, items3, trans3).count() == 9


def test_rq_template_from_text(db1, items3, trans3):
    text = "theta: 10%\nclosed: false\nrequire: G\nitems_active: list G\ntrans_active: one-of-levels\n"
    q = build_query(parse_query(text), db1, items3, trans3)
    assert not q.closed
    assert q.require == bits_of([G])
    assert q.items == AxisConstraint.fixed(bits_of([G]))
    assert q.trans == AxisConstraint.one_per_level()


# ----------------------------------------------------------------- running


def test_q1_theory(db1):
    theory = run_theory(db1, Query(theta=HALF))
    assert {"".join(p.labels) for p in theory} == {"A", "B", "EF", "GK"}
    assert all(p.trans_mask == (1, 2, 3, 4, 5, 6) for p in theory)


def test_q1_prime_only_ef(db1, items3):
    theory = run_theory(db1, Query(theta=HALF, span=(2, 2)), items3)
    assert [(p.item_desc, "".join(p.labels)) for p in theory] == [("ALL", "EF")]


def test_q2_pairs(db1, items3, trans3):
    q = Query(theta=HALF, items=AxisConstraint.group_bounds(2, 2))
    theory = run_theory(db1, q, items3, trans3)
    got = {(p.item_desc, "".join(p.labels)) for p in theory}
    assert got == {
        ("I1+I2", "A"), ("I1+I2", "B"), ("I1+I2", "E"),
        ("I1+I3", "A"), ("I1+I3", "B"), ("I1+I3", "F"), ("I1+I3", "GK"),
        ("I2+I3", "EF"), ("I2+I3", "GK"),
    }


def test_q3_pairs(db1, items3, trans3):
    q = Query(theta=HALF, trans=AxisConstraint.group_bounds(2, 2))
    theory = run_theory(db1, q, items3, trans3)
    got = {(p.trans_desc, "".join(p.labels)) for p in theory}
    assert got == {
        ("T1+T2", "A"), ("T1+T2", "AD"), ("T1+T2", "CH"), ("T1+T2", "GK"),
        ("T1+T3", "B"), ("T1+T3", "BEF"), ("T1+T3", "BGK"), ("T1+T3", "GK"),
        ("T2+T3", "A"), ("T2+T3", "BEF"), ("T2+T3", "EF"),
    }


def test_engine_independence_on_families(db1, items3, trans3):
    queries = [
        Query(theta=HALF),
        Query(theta=HALF, span=(2, 2)),
        Query(theta=HALF, items=AxisConstraint.group_bounds(2, 2)),
        Query(theta=HALF, trans=AxisConstraint.group_bounds(2, 2)),
        Query(
            theta=HALF,
            items=AxisConstraint.group_bounds(2, 2),
            trans=AxisConstraint.group_bounds(2, 2),
        ),
    ]
    for q in queries:
        results = [
            run_theory(db1, q, items3, trans3, engine=e)
            for e in ("cp", "baseline", "oracle")
        ]
        assert results[0] == results[1] == results[2]


def test_q4_decomposes_into_per_mask_q1(db1, items3, trans3):
    from submine.reference import enumerate_masks

    q4 = Query(
        theta=HALF,
        items=AxisConstraint.group_bounds(2, 2),
        trans=AxisConstraint.group_bounds(2, 2),
    )
    whole = theory_labels(run_theory(db1, q4, items3, trans3))
    parts = set()
    for mask in enumerate_masks(db1, q4, items3, trans3):
        fixed = Query(
            theta=HALF,
            items=AxisConstraint.fixed(mask.active_items),
            trans=AxisConstraint.fixed(mask.active_transactions),
        )
        parts |= theory_labels(run_theory(db1, fixed, items3, trans3))
    assert whole == parts


def test_theory_is_sorted_canonically(db1, items3, trans3):
    q = Query(
        theta=HALF,
        items=AxisConstraint.group_bounds(2, 2),
        trans=AxisConstraint.group_bounds(2, 2),
    )
    theory = run_theory(db1, q, items3, trans3)
    assert theory == sorted(theory, key=SolutionPair.sort_key)


def test_same_itemset_under_two_masks_is_two_pairs(db1, items3, trans3):
    q = Query(theta=HALF, items=AxisConstraint.group_bounds(2, 2))
    theory = run_theory(db1, q, items3, trans3)
    gk = [p for p in theory if "".join(p.labels) == "GK"]
    assert len(gk) == 2 and gk[0].item_mask != gk[1].item_mask


def test_parallel_mode_matches_serial(db1, items3, trans3):
    q = Query(
        theta=HALF,
        items=AxisConstraint.group_bounds(2, 2),
        trans=AxisConstraint.group_bounds(2, 2),
    )
    serial = run_theory(db1, q, items3, trans3)
    for engine in ("cp", "baseline"):
        parallel = run_theory(db1, q, items3, trans3, engine=engine, workers=2)
        assert parallel == serial


def test_parallel_mode_over_hierarchy():
    from helpers import car_purchases

    db, scheme = car_purchases()
    q = Query(
        theta=Fraction(1, 10),
        closed=False,
        require=bits_of([1]),
        items=AxisConstraint.fixed(bits_of([1])),
        trans=AxisConstraint.one_per_level(),
    )
    serial = run_theory(db, q, None, scheme)
    assert run_theory(db, q, None, scheme, workers=3) == serial


# ------------------------------------------------------------- self-check


def test_validate_pair_catches_corruption(db1):
    good = run_theory(db1, Query(theta=HALF))[0]
    bad = SolutionPair(
        item_mask=good.item_mask,
        trans_mask=good.trans_mask,
        items=good.items,
        support=good.support + 1,
        item_desc=good.item_desc,
        trans_desc=good.trans_desc,
        labels=good.labels,
    )
    with pytest.raises(RuntimeError, match="self-check"):
        validate_pair(db1, Query(theta=HALF), bad)


def test_describe_mask(db1, items3):
    assert describe_mask(db1.all_items(), db1.all_items(), items3) == "ALL"
    assert describe_mask(bits_of([1, 2, 3, 4, 5]), db1.all_items(), items3) == "I1+I2"
    assert describe_mask(bits_of([1, 3]), db1.all_items(), items3) == "{1,3}"
    assert describe_mask(bits_of([1, 3]), db1.all_items(), None) == "{1,3}"

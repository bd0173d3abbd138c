import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import bigraphs, random_bidirectional_op
from vlll.errors import InapplicableError
from vlll.graphs import (Bigraph, base_graph, bigraph_isomorphism, make_canonical_bigraph, make_cycle_bigraph,
                         make_combinatorial_bigraph, path_graph)
from vlll.reductions import (DELETE_EDGE, DELETE_EVENT, DELETE_VARIABLE, DUPLICATE_EVENT, DUPLICATE_VARIABLE,
                             KINDS, PRESERVES, ReductionOp, apply_reduction, invert, normalize)


def test_delete_pendant_variable():
    nb = [list(x) for x in make_cycle_bigraph(4).event_nbrs]
    nb[2].append(4)
    h = Bigraph.from_neighborhoods(nb, 5)
    assert apply_reduction(h, ReductionOp(DELETE_VARIABLE, variable=4)) == make_cycle_bigraph(4)
    with pytest.raises(InapplicableError):
        apply_reduction(h, ReductionOp(DELETE_VARIABLE, variable=0))


def test_merge_contained_variable():
    h = Bigraph.from_neighborhoods([[0, 1], [0, 1], [0]], 2)
    out = apply_reduction(h, ReductionOp(DUPLICATE_VARIABLE, True, variable=1, source=0))
    assert out.n_variables == 1
    assert base_graph(out) == base_graph(h)
    with pytest.raises(InapplicableError):
        apply_reduction(h, ReductionOp(DUPLICATE_VARIABLE, True, variable=0, source=1))


def test_duplicate_event_appends_twin():
    h = make_cycle_bigraph(4)
    out = apply_reduction(h, ReductionOp(DUPLICATE_EVENT, event=3))
    assert out.n_events == 5 and out.event_nbrs[4] == out.event_nbrs[3]


def test_delete_edge_needs_same_base():
    h = make_cycle_bigraph(4)
    with pytest.raises(InapplicableError):
        apply_reduction(h, ReductionOp(DELETE_EDGE, event=0, variable=0))
    # a redundant edge: two events share two variables
    h2 = Bigraph.from_neighborhoods([[0, 1], [0, 1]], 2)
    assert len(apply_reduction(h2, ReductionOp(DELETE_EDGE, event=0, variable=1)).edges) == 3
    with pytest.raises(InapplicableError):
        apply_reduction(h2, ReductionOp(DELETE_EDGE, True, event=0, variable=1))


def test_delete_event_and_unknown_kind():
    h = make_cycle_bigraph(5)
    out = apply_reduction(h, ReductionOp(DELETE_EVENT, event=2))
    assert out.n_events == 4 and out.n_variables == 5
    with pytest.raises(InapplicableError):
        apply_reduction(h, ReductionOp("Magic"))


def test_direction_table():
    assert set(k for k, _ in PRESERVES) == set(KINDS)
    assert PRESERVES[(DELETE_EDGE, False)] == {"Gapful"}
    assert PRESERVES[(DELETE_EVENT, False)] == {"Gapless"}
    assert PRESERVES[(DELETE_EVENT, True)] == {"Gapful"}
    assert ReductionOp(DELETE_EDGE, True, event=0, variable=0).preserves == {"Gapless"}


def _random_op(h, rng):
    kinds = list(KINDS)
    rng.shuffle(kinds)
    for kind in kinds:
        if kind == DELETE_EDGE:
            edges = list(h.edges)
            rng.shuffle(edges)
            for i, j in edges:
                op = ReductionOp(DELETE_EDGE, event=i, variable=j)
                try:
                    apply_reduction(h, op)
                    return op
                except InapplicableError:
                    pass
            continue
        if kind == DELETE_EVENT:
            if h.n_events > 1:
                return ReductionOp(DELETE_EVENT, event=rng.randrange(h.n_events))
            continue
        return random_bidirectional_op(h, rng)
    return None


@settings(max_examples=120)
@given(bigraphs(max_events=5, max_vars=5), st.randoms(use_true_random=False))
def test_round_trip_all_kinds(h, rnd):
    rng = random.Random(rnd.random())
    for _ in range(4):
        op = _random_op(h, rng)
        if op is None:
            return
        out = apply_reduction(h, op)
        inv = invert(op, h)
        assert inv.kind == op.kind and inv.inverse != op.inverse
        assert apply_reduction(out, inv) == h
        h = out


def test_round_trip_hits_every_kind():
    rng = random.Random(9)
    seen = set()
    # pairs of H_{4,3} events share two variables, so single edges are removable
    h = make_combinatorial_bigraph(4, 3)
    for _ in range(300):
        op = _random_op(h, rng) if rng.random() < 0.5 else random_bidirectional_op(h, rng)
        out = apply_reduction(h, op)
        assert apply_reduction(out, invert(op, h)) == h
        seen.add((op.kind, op.inverse))
    assert {k for k, _ in seen} == set(KINDS)


def test_normalize_examples():
    # canonical path P3: two variables each on one edge, already normal
    p3 = make_canonical_bigraph(path_graph(3))
    assert normalize(p3).normal == p3 and normalize(p3).trace == ()
    # a pendant variable and a duplicate event on H_4
    nb = [list(x) for x in make_cycle_bigraph(4).event_nbrs] + [list(make_cycle_bigraph(4).event_nbrs[0])]
    nb[1].append(4)
    norm = normalize(Bigraph.from_neighborhoods(nb, 5))
    assert norm.normal == make_cycle_bigraph(4)
    assert [op.kind for op in norm.trace] == [DELETE_VARIABLE, DUPLICATE_EVENT]
    assert norm.event_origin == (0, 1, 2, 3)
    # combinatorial H_{4,2}: no variable contained in another, events distinct
    h42 = make_combinatorial_bigraph(4, 2)
    assert normalize(h42).normal == h42


@given(bigraphs(max_events=5, max_vars=5))
def test_normalize_fixpoint_and_origins(h):
    norm = normalize(h)
    out = norm.normal
    assert all(len(v) >= 2 for v in out.var_nbrs)
    sets = [set(v) for v in out.var_nbrs]
    assert not any(a != b and sets[a] <= sets[b] for a in range(len(sets)) for b in range(len(sets)))
    assert len(set(out.event_nbrs)) == out.n_events
    assert normalize(out).normal == out
    # replaying the trace reproduces the normal form
    cur = h
    for op in norm.trace:
        cur = apply_reduction(cur, op)
    assert cur == out
    # origins point at original events/variables with the same incidences
    for i, oi in enumerate(norm.event_origin):
        for j, oj in enumerate(norm.variable_origin):
            assert ((i, j) in out.edge_set) == ((oi, oj) in h.edge_set)
    vo = normalize(h, variables_only=True)
    assert vo.normal.n_events == h.n_events
    assert base_graph(vo.normal) == base_graph(h)


@given(bigraphs(max_events=5, max_vars=5), st.randoms(use_true_random=False))
def test_normal_form_stable_under_bidirectional_ops(h, rnd):
    rng = random.Random(rnd.random())
    cur = h
    for _ in range(5):
        cur = apply_reduction(cur, random_bidirectional_op(cur, rng))
    a, b = normalize(h).normal, normalize(cur).normal
    assert bigraph_isomorphism(a, b) is not None

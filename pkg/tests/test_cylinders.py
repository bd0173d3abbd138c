import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_cell_measures
from strategies import bigraphs
from vlll.cycle import cycle_gapful_witness
from vlll.cylinders import DiscreteCylinderSet, evaluate_cylinder_set, event_measure
from vlll.errors import CapExceededError, InvalidInputError
from vlll.graphs import Bigraph, base_graph, make_cycle_bigraph
from vlll.tree import tree_boundary_lambda, tree_witness


def test_partition_validation():
    with pytest.raises(InvalidInputError):
        DiscreteCylinderSet(((0.5, 0.4),), (np.zeros(2, dtype=bool),))
    with pytest.raises(InvalidInputError):
        DiscreteCylinderSet(((1.5, -0.5),), (np.zeros(2, dtype=bool),))
    with pytest.raises(InvalidInputError):
        DiscreteCylinderSet(((),), ())


def test_conformance_errors():
    h = make_cycle_bigraph(3)
    cs = cycle_gapful_witness(3)
    with pytest.raises(InvalidInputError):
        evaluate_cylinder_set(cs, make_cycle_bigraph(4))
    bad = DiscreteCylinderSet(cs.partitions, (np.zeros((2,), dtype=bool),) + cs.indicators[1:])
    with pytest.raises(InvalidInputError):
        evaluate_cylinder_set(bad, h)


def test_gapful_witness_n4_numbers():
    ev = evaluate_cylinder_set(cycle_gapful_witness(4), make_cycle_bigraph(4))
    assert ev.measures == pytest.approx((0.25,) * 4)
    assert ev.union == pytest.approx(0.875)
    assert ev.exclusive and ev.max_overlap == 0.0


def test_two_event_tree_witness():
    h = Bigraph.from_neighborhoods([[0], [0]], 1)
    w = tree_witness(h, tree_boundary_lambda(h, [1, 1]).boundary_vector)
    ev = evaluate_cylinder_set(w.cylinder_set, h)
    assert ev.union == pytest.approx(1.0) and ev.exclusive


def test_cell_cap():
    h = make_cycle_bigraph(10)
    with pytest.raises(CapExceededError):
        evaluate_cylinder_set(cycle_gapful_witness(10), h, cell_cap=100)


def test_unused_variable_and_empty_neighborhood():
    h = Bigraph.from_neighborhoods([[0], []], 2)
    cs = DiscreteCylinderSet(((0.3, 0.7), (1.0,)), (np.array([True, False]), np.array(True)))
    ev = evaluate_cylinder_set(cs, h)
    assert ev.measures == pytest.approx((0.3, 1.0))
    assert ev.union == pytest.approx(1.0)


@st.composite
def cylinder_sets(draw):
    h = draw(bigraphs(max_events=4, max_vars=4))
    parts = []
    for _ in range(h.n_variables):
        k = draw(st.integers(1, 3))
        w = [draw(st.integers(1, 8)) for _ in range(k)]
        parts.append(tuple(x / sum(w) for x in w))
    # make each row sum to exactly 1 in floating point
    parts = [row[:-1] + (1.0 - sum(row[:-1]),) for row in parts]
    inds = []
    for nb in h.event_nbrs:
        shape = tuple(len(parts[j]) for j in nb)
        size = int(np.prod(shape)) if shape else 1
        bits = draw(st.lists(st.booleans(), min_size=size, max_size=size))
        inds.append(np.array(bits, dtype=bool).reshape(shape))
    return h, DiscreteCylinderSet(tuple(parts), tuple(inds))


@settings(max_examples=100)
@given(cylinder_sets())
def test_evaluation_matches_exact_enumeration(data):
    h, cs = data
    ev = evaluate_cylinder_set(cs, h)

    def member(i, cell):
        return bool(cs.indicators[i][tuple(cell[j] for j in h.event_nbrs[i])])

    meas, union, over = exact_cell_measures(cs.partitions, h.event_nbrs, member)
    assert ev.measures == pytest.approx([float(x) for x in meas], abs=1e-12)
    assert ev.union == pytest.approx(float(union), abs=1e-12)
    for e in base_graph(h).edges:
        assert ev.overlaps[e] == pytest.approx(float(over.get(e, 0)), abs=1e-12)
    assert ev.exclusive == all(over.get(e, 0) == 0 for e in base_graph(h).edges)
    for i in range(h.n_events):
        assert event_measure(cs, h, i) == pytest.approx(ev.measures[i], abs=1e-15)


@given(cylinder_sets())
def test_json_round_trip(data):
    _, cs = data
    back = DiscreteCylinderSet.from_json(json.loads(json.dumps(cs.to_json())))
    assert back.same_as(cs)


def test_from_json_rejects_garbage():
    with pytest.raises(InvalidInputError):
        DiscreteCylinderSet.from_json({"partitions": [[1.0]]})

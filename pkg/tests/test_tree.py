import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import abstract_lambda, exact_cell_measures, scalar_bisect
from vlll.cylinders import evaluate_cylinder_set
from vlll.errors import InapplicableError, InvalidInputError
from vlll.graphs import (Bigraph, base_graph, make_cycle_bigraph, path_graph, random_tree_bigraph,
                         star_graph, tree_bigraph)
from vlll.shearer import abstract_boundary_lambda
from vlll.tree import RootedTree, tree_boundary_lambda, tree_recursion, tree_witness


def _cell_oracle(h, cs):
    def member(i, cell):
        return bool(cs.indicators[i][tuple(cell[j] for j in h.event_nbrs[i])])
    return exact_cell_measures(cs.partitions, h.event_nbrs, member)


def test_two_events_one_variable():
    h = Bigraph.from_neighborhoods([[0], [0]], 1)
    r = tree_boundary_lambda(h, [1, 1])
    assert r.lam == pytest.approx(0.5, abs=1e-12)
    w = tree_witness(h, r.boundary_vector)
    boxes = sorted(w.boxes[i][0][0] for i in range(2))
    assert boxes[0][0] == 0.0 and boxes[0][1] == pytest.approx(0.5)
    assert boxes[1][0] == pytest.approx(0.5) and boxes[1][1] == pytest.approx(1.0)


def test_path_quadratic():
    # leaf value q with q^2 - 3q + 1 = 0
    q = (3 - math.sqrt(5)) / 2
    r = tree_boundary_lambda(tree_bigraph(path_graph(3)), [1, 1, 1])
    assert abs(r.lam - q) < 1e-10
    assert r.residual < 1e-9


def test_star_scalar_root():
    x = scalar_bisect(lambda t: t - (1 - t) ** 3, 0.0, 1.0)
    r = tree_boundary_lambda(tree_bigraph(star_graph(3)), [1] * 4)
    assert abs(r.lam - x) < 1e-10
    assert r.info["root"] == 0


def test_non_tree_rejected():
    with pytest.raises(InapplicableError):
        tree_boundary_lambda(make_cycle_bigraph(4), [1] * 4)


def test_root_invariance():
    rng = random.Random(4)
    for _ in range(10):
        h = random_tree_bigraph(rng.randint(2, 9), rng)
        d = [rng.uniform(0.2, 1) for _ in range(h.n_events)]
        lams = [tree_boundary_lambda(h, d, root=v).lam for v in range(h.n_events)]
        assert max(lams) - min(lams) < 1e-9


@settings(max_examples=30)
@given(st.integers(2, 10), st.randoms(use_true_random=False))
def test_gapless_against_shearer(n, rnd):
    h = random_tree_bigraph(n, random.Random(rnd.random()))
    d = [rnd.uniform(0.2, 1.0) for _ in range(n)]
    r = tree_boundary_lambda(h, d)
    assert abs(r.lam - abstract_boundary_lambda(base_graph(h), d).lam) <= 1e-9
    if n <= 7:
        assert abs(r.lam - abstract_lambda(n, base_graph(h).edges, d)) <= 1e-9


@settings(max_examples=20)
@given(st.integers(2, 8), st.randoms(use_true_random=False), st.floats(0.2, 4.0))
def test_homogeneity_and_q_interior(n, rnd, c):
    h = random_tree_bigraph(n, random.Random(rnd.random()))
    d = [rnd.uniform(0.2, 1.0) for _ in range(n)]
    r = tree_boundary_lambda(h, d)
    assert abs(tree_boundary_lambda(h, [c * x for x in d]).lam - r.lam / c) < 1e-9
    t = RootedTree.from_graph(base_graph(h))
    q, valid, res = tree_recursion(t, [(r.lam - 1e-10) * x for x in d])
    assert valid and res < 0 and all(0 < v < 1 for i, v in enumerate(q) if i != t.root)


@settings(max_examples=25)
@given(st.integers(1, 7), st.randoms(use_true_random=False))
def test_witness_exclusive_exact(n, rnd):
    h = random_tree_bigraph(n, random.Random(rnd.random()))
    d = [rnd.uniform(0.2, 1.0) for _ in range(n)]
    if n == 1:
        # a lone event; its boundary is the whole cube
        r = tree_boundary_lambda(h, d)
        assert r.lam == pytest.approx(1 / d[0])
        return
    r = tree_boundary_lambda(h, d)
    w = tree_witness(h, r.boundary_vector)
    meas, union, over = _cell_oracle(h, w.cylinder_set)
    g = base_graph(h)
    for a, b in g.edges:
        assert over.get((a, b), Fraction(0)) == 0
    # floats in, floats out: the measures are exact products of the stored partitions
    for i in range(n):
        assert float(meas[i]) == pytest.approx(r.boundary_vector[i], abs=1e-9)
    assert float(union) == pytest.approx(1.0, abs=1e-9)
    ex = w.exact_overlaps(h)
    assert all(v == 0 for v in ex.values())
    assert [float(x) for x in w.exact_measures()] == pytest.approx(list(r.boundary_vector), abs=1e-9)
    e = evaluate_cylinder_set(w.cylinder_set, h)
    assert e.exclusive and e.union == pytest.approx(1.0, abs=1e-9)


def test_path_witness_boxes():
    h = tree_bigraph(path_graph(3))
    r = tree_boundary_lambda(h, [1, 1, 1])
    w = tree_witness(h, r.boundary_vector)
    assert all(len(bs) == 1 for bs in w.boxes)
    for i, bs in enumerate(w.boxes):
        assert set(bs[0]) <= set(h.event_nbrs[i])
    js = w.to_json()
    assert isinstance(js["events"][0]["boxes"][0][str(h.event_nbrs[0][0] + 1)][0], str)


def test_witness_rejects_inconsistent_vector():
    h = tree_bigraph(path_graph(3))
    with pytest.raises(InvalidInputError):
        tree_witness(h, [0.5, 0.5, 0.5])

import itertools
import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import contains_cycle_bigraph, has_induced_cycle, independent_subsets
from strategies import bigraphs, graphs
from vlll.errors import CapExceededError, InvalidInputError
from vlll.graphs import (Bigraph, CyclicEmbedding, DependencyGraph, base_graph, bigraph_from_json,
                         bigraph_isomorphism, bigraph_to_json, check_cyclic_embedding, complete_graph,
                         contains_cyclic, cycle_graph, cyclic_order, graph_from_json, graph_to_json,
                         graphs_isomorphic, independent_sets, is_chordal, is_connected, is_tree,
                         make_canonical_bigraph, make_combinatorial_bigraph, make_cycle_bigraph,
                         make_hstar, make_upper_combinatorial, maximal_cliques, path_graph, random_tree,
                         split_components, star_graph)
from vlll.reductions import normalize


def test_bigraph_canonical_order_and_validation():
    a = Bigraph(2, 2, ((1, 0), (0, 1), (0, 0)))
    b = Bigraph(2, 2, ((0, 0), (0, 1), (1, 0)))
    assert a == b
    with pytest.raises(InvalidInputError):
        Bigraph(2, 2, ((0, 0), (0, 0)))
    with pytest.raises(InvalidInputError):
        Bigraph(2, 2, ((2, 0),))
    with pytest.raises(InvalidInputError):
        DependencyGraph(2, ((0, 0),))


def test_base_graph_examples():
    assert base_graph(make_cycle_bigraph(3)) == complete_graph(3)
    assert graphs_isomorphic(base_graph(make_cycle_bigraph(4)), cycle_graph(4))
    assert base_graph(make_combinatorial_bigraph(4, 3)) == complete_graph(4)


@pytest.mark.parametrize("n", range(3, 13))
def test_cycle_bigraph_base_is_cycle(n):
    h = make_cycle_bigraph(n)
    assert (h.n_events, h.n_variables, len(h.edges)) == (n, n, 2 * n)
    assert all(len(v) == 2 for v in h.var_nbrs)
    assert graphs_isomorphic(base_graph(h), cycle_graph(n))


def test_cycle_bigraph_rejects_small():
    with pytest.raises(InvalidInputError):
        make_cycle_bigraph(2)


@pytest.mark.parametrize("n", range(2, 9))
def test_combinatorial_base_complete_when_m_at_least_half(n):
    for m in range(1, n):
        h = make_combinatorial_bigraph(n, m)
        assert h.n_events == math.comb(n, m)
        if 2 * m > n:
            g = base_graph(h)
            assert len(g.edges) == math.comb(h.n_events, 2)


def test_combinatorial_examples():
    h = make_combinatorial_bigraph(4, 3)
    assert h.n_events == 4 and all(len(nb) == 3 for nb in h.event_nbrs)
    assert bigraph_isomorphism(make_combinatorial_bigraph(3, 2), make_cycle_bigraph(3)) is not None
    h21 = make_combinatorial_bigraph(2, 1)
    assert h21.event_nbrs == ((0,), (1,))
    with pytest.raises(InvalidInputError):
        make_combinatorial_bigraph(3, 3)


def test_upper_combinatorial_counts():
    assert make_upper_combinatorial(2, 1).n_events == 3
    h = make_upper_combinatorial(3, 3)
    assert h.n_events == 1 and h.event_nbrs[0] == (0, 1, 2)
    assert make_upper_combinatorial(10, 8).n_events == 56


def test_hstar():
    h = make_hstar()
    assert h.event_nbrs[0] == (0, 3, 4)
    assert h.event_nbrs[3] == (0, 1, 2, 3)
    assert base_graph(h) == complete_graph(5)


def test_canonical_bigraph_examples():
    k3 = make_canonical_bigraph(complete_graph(3))
    assert (k3.n_events, k3.n_variables, len(k3.edges)) == (3, 1, 3)
    assert make_canonical_bigraph(path_graph(3)).n_variables == 2
    c4 = make_canonical_bigraph(cycle_graph(4))
    assert c4.n_variables == 4
    assert bigraph_isomorphism(c4, make_cycle_bigraph(4)) is not None


def test_tree_and_chordal_examples():
    assert is_tree(path_graph(3)) and not is_tree(cycle_graph(4)) and is_tree(DependencyGraph(1, ()))
    assert not is_chordal(cycle_graph(4)) and is_chordal(complete_graph(4))
    rng = random.Random(5)
    for n in range(1, 12):
        assert is_chordal(random_tree(n, rng))


def test_independent_sets_examples():
    c4 = independent_sets(cycle_graph(4))
    assert len(c4) == 7 and (0, 2) in c4 and (1, 3) in c4
    assert len(independent_sets(complete_graph(3))) == 4
    assert len(independent_sets(DependencyGraph(2, ()))) == 4
    with pytest.raises(CapExceededError):
        independent_sets(DependencyGraph(26, ()))


@given(graphs(max_n=9))
def test_independent_sets_match_bruteforce(g):
    got = independent_sets(g)
    assert sorted(got) == sorted(independent_subsets(g.n_vertices, g.edges))
    assert got == sorted(got, key=lambda s: (len(s), s)) or got == sorted(got)


def test_independent_set_count_n15():
    rng = random.Random(11)
    for _ in range(3):
        n = 15
        g = DependencyGraph(n, tuple((a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.3))
        assert len(independent_sets(g)) == len(independent_subsets(n, g.edges))


@settings(max_examples=150)
@given(graphs(max_n=7))
def test_chordal_matches_induced_cycle_search(g):
    assert is_chordal(g) == (not has_induced_cycle(g.n_vertices, g.edges))
    assert is_chordal(g) == nx.is_chordal(g.to_networkx())


@given(graphs(max_n=8))
def test_tree_connected_and_cliques_match_networkx(g):
    ng = g.to_networkx()
    assert is_connected(g) == nx.is_connected(ng)
    assert is_tree(g) == nx.is_tree(ng)
    ref = sorted(tuple(sorted(c)) for c in nx.find_cliques(ng))
    assert maximal_cliques(g) == ref


def test_split_components():
    h = Bigraph.from_neighborhoods([[0], [0], [1], [1, 2], [2]], 3)
    parts = split_components(h)
    assert len(parts) == 2
    assert not is_connected(base_graph(h))


def test_contains_cyclic_examples():
    emb = contains_cyclic(make_cycle_bigraph(4))
    assert emb is not None and emb.cycle_length == 4
    assert emb.event_map == (0, 1, 2, 3) and emb.variable_map == (0, 1, 2, 3)
    e42 = contains_cyclic(make_combinatorial_bigraph(4, 2))
    assert e42 is not None and e42.cycle_length == 3
    assert contains_cyclic(make_combinatorial_bigraph(4, 3)) is None
    # a variable on all three triangle events blocks the 3-cycle
    assert contains_cyclic(make_canonical_bigraph(complete_graph(3))) is None


@settings(max_examples=80)
@given(bigraphs(max_events=5, max_vars=5))
def test_contains_cyclic_matches_definition(h):
    emb = contains_cyclic(h)
    assert (emb is not None) == contains_cycle_bigraph(h.event_nbrs, h.n_variables)
    if emb is not None:
        assert check_cyclic_embedding(h, emb)


def test_check_embedding_rejects_bad_maps():
    h = make_cycle_bigraph(4)
    assert not check_cyclic_embedding(h, CyclicEmbedding((0, 1, 2, 3), (1, 2, 3, 0)))
    assert not check_cyclic_embedding(h, CyclicEmbedding((0, 1, 2), (0, 1, 2)))
    # an extra variable shared by two image events violates the second condition
    h2 = Bigraph.from_neighborhoods([[0, 1, 4], [1, 2], [2, 3, 4], [3, 0]], 5)
    assert not check_cyclic_embedding(h2, CyclicEmbedding((0, 1, 2, 3), (0, 1, 2, 3)))


@settings(max_examples=80)
@given(bigraphs(max_events=6, max_vars=6))
def test_induced_long_cycle_gives_embedding_after_normalizing(h):
    hn = normalize(h).normal
    if has_induced_cycle(hn.n_events, base_graph(hn).edges):
        assert contains_cyclic(hn) is not None


def test_cyclic_order():
    assert cyclic_order(make_cycle_bigraph(5)) is not None
    assert cyclic_order(make_canonical_bigraph(complete_graph(3))) is None
    assert cyclic_order(make_combinatorial_bigraph(4, 3)) is None


@given(bigraphs(max_events=5, max_vars=5), st.randoms(use_true_random=False))
def test_isomorphism_under_relabeling(h, rnd):
    pe = list(range(h.n_events))
    pv = list(range(h.n_variables))
    rnd.shuffle(pe)
    rnd.shuffle(pv)
    g = Bigraph(h.n_events, h.n_variables, tuple((pe[i], pv[j]) for i, j in h.edges))
    iso = bigraph_isomorphism(h, g)
    assert iso is not None
    ev, vr = iso
    assert sorted((ev[i], vr[j]) for i, j in h.edges) == sorted(g.edges)


def test_isomorphism_negative_and_large_symmetric():
    assert bigraph_isomorphism(make_cycle_bigraph(6),
                               Bigraph.from_neighborhoods([[0, 1], [1, 2], [2, 0], [3, 4], [4, 5], [5, 3]], 6)) is None
    big = make_combinatorial_bigraph(7, 5)
    assert bigraph_isomorphism(big, big) is not None
    assert bigraph_isomorphism(make_hstar(), make_combinatorial_bigraph(5, 4)) is None


@given(bigraphs(max_events=5, max_vars=5))
def test_json_round_trip(h):
    assert bigraph_from_json(bigraph_to_json(h)) == h
    g = base_graph(h)
    assert graph_from_json(graph_to_json(g)) == g


def test_json_is_one_based_and_validated():
    d = bigraph_to_json(make_cycle_bigraph(3))
    assert min(i for i, _ in d["edges"]) == 1
    with pytest.raises(InvalidInputError):
        bigraph_from_json({"events": 1})
    with pytest.raises(InvalidInputError):
        bigraph_from_json({"events": 1, "variables": 1, "edges": [[2, 1]]})


def test_generators_shapes():
    assert len(star_graph(3).edges) == 3
    rng = random.Random(0)
    for n in range(1, 10):
        assert is_tree(random_tree(n, rng))
    assert len(list(itertools.chain(*[c for c in maximal_cliques(complete_graph(4))]))) == 4

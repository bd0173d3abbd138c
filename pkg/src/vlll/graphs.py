"""Event-variable bigraphs, dependency graphs and structural predicates.

Indices are 0-based everywhere inside the package. The JSON helpers at the
bottom convert to and from the 1-based external format.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx

from .errors import CapExceededError, InvalidInputError

INDEPENDENT_SET_CAP = 25


@dataclass(frozen=True)
class DependencyGraph:
    n_vertices: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n_vertices < 0:
            raise InvalidInputError("vertex count must be nonnegative")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidInputError(f"edge ({u},{v}) out of range")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @cached_property
    def adj(self) -> tuple:
        nb = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(frozenset(s) for s in nb)

    @cached_property
    def adj_masks(self) -> tuple:
        return tuple(sum(1 << v for v in s) for s in self.adj)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def induced(self, vertices: Sequence[int]) -> "DependencyGraph":
        pos = {v: k for k, v in enumerate(vertices)}
        return DependencyGraph(len(vertices), tuple((pos[u], pos[v]) for u, v in self.edges
                                                     if u in pos and v in pos))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class Bigraph:
    """Bipartite incidence structure between events and variables."""
    n_events: int
    n_variables: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n_events < 0 or self.n_variables < 0:
            raise InvalidInputError("sizes must be nonnegative")
        seen = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if not (0 <= i < self.n_events and 0 <= j < self.n_variables):
                raise InvalidInputError(f"edge ({i},{j}) out of range")
            if (i, j) in seen:
                raise InvalidInputError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def from_neighborhoods(cls, nbhds: Sequence[Iterable[int]], n_variables: Optional[int] = None) -> "Bigraph":
        nbhds = [sorted(set(s)) for s in nbhds]
        if n_variables is None:
            n_variables = 1 + max((max(s) for s in nbhds if s), default=-1)
        return cls(len(nbhds), n_variables, tuple((i, j) for i, s in enumerate(nbhds) for j in s))

    @cached_property
    def event_nbrs(self) -> tuple:
        nb = [[] for _ in range(self.n_events)]
        for i, j in self.edges:
            nb[i].append(j)
        return tuple(tuple(s) for s in nb)

    @cached_property
    def var_nbrs(self) -> tuple:
        nb = [[] for _ in range(self.n_variables)]
        for i, j in self.edges:
            nb[j].append(i)
        return tuple(tuple(s) for s in nb)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def var_degree(self, j: int) -> int:
        return len(self.var_nbrs[j])

    def restrict_events(self, events: Sequence[int]) -> "Bigraph":
        """Keep only the listed events (in the given order); all variables are kept."""
        return Bigraph.from_neighborhoods([self.event_nbrs[i] for i in events], self.n_variables)


# ---------------------------------------------------------------- graph predicates

def base_graph(h: Bigraph) -> DependencyGraph:
    edges = set()
    for evs in h.var_nbrs:
        for a, b in itertools.combinations(evs, 2):
            edges.add((a, b))
    return DependencyGraph(h.n_events, tuple(edges))


def is_connected(g: DependencyGraph) -> bool:
    if g.n_vertices == 0:
        return False
    seen = {0}
    stack = [0]
    while stack:
        for w in g.adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n_vertices


def connected_components(g: DependencyGraph) -> list:
    comp = [-1] * g.n_vertices
    out = []
    for s in range(g.n_vertices):
        if comp[s] >= 0:
            continue
        comp[s] = len(out)
        members, stack = [s], [s]
        while stack:
            for w in g.adj[stack.pop()]:
                if comp[w] < 0:
                    comp[w] = comp[s]
                    members.append(w)
                    stack.append(w)
        out.append(sorted(members))
    return out


def split_components(h: Bigraph) -> list:
    """Split h by connected components of its base graph.

    Returns (events, variables, sub-bigraph) triples; variables touched by no
    event are dropped."""
    out = []
    for events in connected_components(base_graph(h)):
        variables = sorted({j for i in events for j in h.event_nbrs[i]})
        vpos = {j: k for k, j in enumerate(variables)}
        sub = Bigraph.from_neighborhoods([[vpos[j] for j in h.event_nbrs[i]] for i in events], len(variables))
        out.append((events, variables, sub))
    return out


def is_tree(g: DependencyGraph) -> bool:
    return is_connected(g) and len(g.edges) == g.n_vertices - 1


def is_chordal(g: DependencyGraph) -> bool:
    """Maximum cardinality search followed by a perfect-elimination check."""
    n = g.n_vertices
    weight = [0] * n
    numbered = [False] * n
    order = []
    for _ in range(n):
        v = max((u for u in range(n) if not numbered[u]), key=lambda u: (weight[u], -u))
        numbered[v] = True
        order.append(v)
        for w in g.adj[v]:
            if not numbered[w]:
                weight[w] += 1
    # reversed MCS order is a PEO iff g is chordal
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        earlier = [w for w in g.adj[v] if pos[w] < pos[v]]
        if not earlier:
            continue
        parent = max(earlier, key=lambda w: pos[w])
        for w in earlier:
            if w != parent and not g.has_edge(w, parent):
                return False
    return True


def maximal_cliques(g: DependencyGraph) -> list:
    """Bron-Kerbosch with pivoting; cliques returned sorted lexicographically."""
    out = []

    def expand(r, p, x):
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(g.adj[u] & p))
        for v in sorted(p - g.adj[pivot]):
            expand(r | {v}, p & g.adj[v], x & g.adj[v])
            p = p - {v}
            x = x | {v}

    expand(frozenset(), frozenset(range(g.n_vertices)), frozenset())
    return sorted(out)


def independent_sets(g: DependencyGraph, cap: int = INDEPENDENT_SET_CAP) -> list:
    """All independent sets (including the empty set), in lexicographic order of sorted tuples."""
    if g.n_vertices > cap:
        raise CapExceededError(f"{g.n_vertices} vertices exceeds independent-set cap {cap}")
    return [tuple(v for v in range(g.n_vertices) if m >> v & 1)
            for m in sorted(independent_masks(g), key=lambda m: [v for v in range(g.n_vertices) if m >> v & 1])]


def independent_masks(g: DependencyGraph) -> list:
    """Bitmasks of all independent sets, by branching on the lowest free vertex."""
    adj = g.adj_masks
    out = []

    def rec(chosen, free):
        if not free:
            out.append(chosen)
            return
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        rec(chosen, rest)
        rec(chosen | (1 << v), rest & ~adj[v])

    rec(0, (1 << g.n_vertices) - 1)
    return out


# ---------------------------------------------------------------- generators

def complete_graph(n: int) -> DependencyGraph:
    return DependencyGraph(n, tuple(itertools.combinations(range(n), 2)))


def cycle_graph(n: int) -> DependencyGraph:
    return DependencyGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> DependencyGraph:
    return DependencyGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> DependencyGraph:
    return DependencyGraph(leaves + 1, tuple((0, k) for k in range(1, leaves + 1)))


def random_tree(n: int, rng: random.Random) -> DependencyGraph:
    return DependencyGraph(n, tuple((rng.randrange(v), v) for v in range(1, n)))


def random_graph(n: int, prob: float, rng: random.Random) -> DependencyGraph:
    return DependencyGraph(n, tuple(e for e in itertools.combinations(range(n), 2) if rng.random() < prob))


def make_cycle_bigraph(n: int) -> Bigraph:
    if n < 3:
        raise InvalidInputError("cyclic bigraphs need n >= 3")
    return Bigraph.from_neighborhoods([(i, (i + 1) % n) for i in range(n)], n)


def make_combinatorial_bigraph(n: int, m: int) -> Bigraph:
    if not 1 <= m < n:
        raise InvalidInputError("need 1 <= m < n")
    return Bigraph.from_neighborhoods(list(itertools.combinations(range(n), m)), n)


def make_upper_combinatorial(n: int, m: int) -> Bigraph:
    if not 1 <= m <= n:
        raise InvalidInputError("need 1 <= m <= n")
    subsets = [s for t in range(m, n + 1) for s in itertools.combinations(range(n), t)]
    return Bigraph.from_neighborhoods(subsets, n)


def make_hstar() -> Bigraph:
    return Bigraph.from_neighborhoods([(0, 3, 4), (1, 3, 4), (2, 3, 4), (0, 1, 2, 3), (0, 1, 2, 4)], 5)


def make_canonical_bigraph(g: DependencyGraph) -> Bigraph:
    cliques = maximal_cliques(g)
    return Bigraph(g.n_vertices, len(cliques), tuple((i, j) for j, c in enumerate(cliques) for i in c))


def tree_bigraph(g: DependencyGraph) -> Bigraph:
    """One variable per edge of g (the canonical bigraph when g is triangle-free)."""
    return Bigraph(g.n_vertices, len(g.edges), tuple((i, j) for j, e in enumerate(g.edges) for i in e))


def random_tree_bigraph(n_events: int, rng: random.Random, extras: bool = True) -> Bigraph:
    """Bigraph whose base graph is a random tree; optionally adds pendant and duplicate variables."""
    t = random_tree(n_events, rng)
    nbhds = [set() for _ in range(n_events)]
    var = 0
    for u, v in t.edges:
        copies = 1 + (rng.random() < 0.2 if extras else 0)
        for _ in range(copies):
            nbhds[u].add(var)
            nbhds[v].add(var)
            var += 1
    if extras:
        for i in range(n_events):
            if rng.random() < 0.3:
                nbhds[i].add(var)
                var += 1
    return Bigraph.from_neighborhoods(nbhds, var)


# ---------------------------------------------------------------- isomorphism

def _to_nx(h: Bigraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from((("e", i) for i in range(h.n_events)), side=0)
    g.add_nodes_from((("v", j) for j in range(h.n_variables)), side=1)
    g.add_edges_from((("e", i), ("v", j)) for i, j in h.edges)
    return g


def _transpose(h: Bigraph) -> Bigraph:
    return Bigraph(h.n_variables, h.n_events, tuple((j, i) for i, j in h.edges))


def _wl_colors(a: Bigraph, b: Bigraph, rounds: int = 6) -> tuple:
    """Joint colour refinement; returns variable colours of a and of b."""
    hs = (a, b)
    ev = [[0] * h.n_events for h in hs]
    vr = [[0] * h.n_variables for h in hs]
    for _ in range(rounds):
        table = {}
        new_vr = [[table.setdefault((vr[k][j], tuple(sorted(ev[k][i] for i in h.var_nbrs[j]))), len(table))
                   for j in range(h.n_variables)] for k, h in enumerate(hs)]
        table = {}
        new_ev = [[table.setdefault((ev[k][i], tuple(sorted(new_vr[k][j] for j in h.event_nbrs[i]))), len(table))
                   for i in range(h.n_events)] for k, h in enumerate(hs)]
        if new_vr == vr and new_ev == ev:
            break
        ev, vr = new_ev, new_vr
    return vr[0], vr[1], ev[0], ev[1]


def _match_columns(a: Bigraph, b: Bigraph) -> Optional[tuple]:
    """Backtrack over a variable bijection; events follow from their signatures."""
    va, vb, ea, eb = _wl_colors(a, b)
    if sorted(va) != sorted(vb) or sorted(ea) != sorted(eb):
        return None
    m = a.n_variables
    order = sorted(range(m), key=lambda j: (sum(1 for x in va if x == va[j]), -len(a.var_nbrs[j]), j))
    sig_a = [0] * a.n_events
    sig_b = [0] * b.n_events
    used = [False] * m
    image = [None] * m

    def consistent():
        return sorted(zip(sig_a, ea)) == sorted(zip(sig_b, eb))

    def rec(depth):
        if depth == m:
            return True
        j = order[depth]
        bit = 1 << depth
        for w in range(m):
            if used[w] or vb[w] != va[j] or len(b.var_nbrs[w]) != len(a.var_nbrs[j]):
                continue
            for i in a.var_nbrs[j]:
                sig_a[i] |= bit
            for i in b.var_nbrs[w]:
                sig_b[i] |= bit
            if consistent():
                used[w], image[j] = True, w
                if rec(depth + 1):
                    return True
                used[w], image[j] = False, None
            for i in a.var_nbrs[j]:
                sig_a[i] &= ~bit
            for i in b.var_nbrs[w]:
                sig_b[i] &= ~bit
        return False

    if not rec(0):
        return None
    pool = {}
    for i in range(b.n_events):
        pool.setdefault((sig_b[i], eb[i]), []).append(i)
    ev_map = tuple(pool[(sig_a[i], ea[i])].pop() for i in range(a.n_events))
    return ev_map, tuple(image)


def bigraph_isomorphism(a: Bigraph, b: Bigraph) -> Optional[tuple]:
    """Side-preserving isomorphism a -> b as (event_map, variable_map), or None."""
    if (a.n_events, a.n_variables, len(a.edges)) != (b.n_events, b.n_variables, len(b.edges)):
        return None
    if sorted(map(len, a.event_nbrs)) != sorted(map(len, b.event_nbrs)):
        return None
    if sorted(map(len, a.var_nbrs)) != sorted(map(len, b.var_nbrs)):
        return None
    if a.n_variables <= a.n_events:
        return _match_columns(a, b)
    found = _match_columns(_transpose(a), _transpose(b))
    return None if found is None else (found[1], found[0])


def graphs_isomorphic(a: DependencyGraph, b: DependencyGraph) -> bool:
    return nx.is_isomorphic(a.to_networkx(), b.to_networkx())


# ---------------------------------------------------------------- cyclic containment

@dataclass(frozen=True)
class CyclicEmbedding:
    """Images of the canonical cyclic bigraph H_k inside a host bigraph.

    Cycle event c has variables c and c+1 (mod k); event_map[c] and
    variable_map[c] give their images."""
    event_map: tuple
    variable_map: tuple
    cycle_length: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cycle_length", len(self.event_map))


def check_cyclic_embedding(h: Bigraph, emb: CyclicEmbedding) -> bool:
    """Verify both containment conditions (second one read with i != k)."""
    k = emb.cycle_length
    ev, vr = emb.event_map, emb.variable_map
    if k < 3 or len(set(ev)) != k or len(set(vr)) != k or len(vr) != k:
        return False
    for c in range(k):
        for t in range(k):
            expected = t in (c, (c + 1) % k)
            if ((ev[c], vr[t]) in h.edge_set) != expected:
                return False
    image_ev, image_vr = set(ev), set(vr)
    for j in range(h.n_variables):
        if j not in image_vr and sum(1 for i in h.var_nbrs[j] if i in image_ev) >= 2:
            return False
    return True


def _shared_vars(h: Bigraph, a: int, b: int) -> list:
    return sorted(set(h.event_nbrs[a]) & set(h.event_nbrs[b]))


def iter_cyclic_embeddings(h: Bigraph, max_length: Optional[int] = None) -> Iterator[CyclicEmbedding]:
    """Embeddings by increasing cycle length, then by event-index order.

    Consecutive image events must share exactly one variable and
    non-consecutive ones none, which is equivalent to the two conditions."""
    g = base_graph(h)
    n = h.n_events
    top = n if max_length is None else min(n, max_length)
    for k in range(3, top + 1):
        for start in range(n):
            path = [start]

            def extend():
                last = path[-1]
                if len(path) == k:
                    if start in g.adj[last] and len(_shared_vars(h, last, start)) == 1:
                        yield list(path)
                    return
                for w in sorted(g.adj[last]):
                    if w <= start or w in path:
                        continue
                    if len(_shared_vars(h, last, w)) != 1:
                        continue
                    # w may only touch its predecessor, and the start when it closes the cycle
                    bad = False
                    for u in path[:-1]:
                        if g.has_edge(u, w) and not (u == start and len(path) == k - 1):
                            bad = True
                            break
                    if bad:
                        continue
                    path.append(w)
                    yield from extend()
                    path.pop()

            for cyc in extend():
                if cyc[1] > cyc[-1]:
                    continue  # each cycle once per direction
                vr = [_shared_vars(h, cyc[(c - 1) % k], cyc[c])[0] for c in range(k)]
                emb = CyclicEmbedding(tuple(cyc), tuple(vr))
                if check_cyclic_embedding(h, emb):
                    yield emb


def contains_cyclic(h: Bigraph, max_length: Optional[int] = None) -> Optional[CyclicEmbedding]:
    return next(iter_cyclic_embeddings(h, max_length), None)


def cycle_order(g: DependencyGraph) -> Optional[list]:
    """Vertex order along g if g is a single cycle (n >= 3), else None."""
    n = g.n_vertices
    if n < 3 or len(g.edges) != n or any(len(a) != 2 for a in g.adj) or not is_connected(g):
        return None
    order = [0]
    prev, cur = None, 0
    while len(order) < n:
        nxt = min(w for w in g.adj[cur] if w != prev)
        order.append(nxt)
        prev, cur = cur, nxt
    return order


def cyclic_order(h: Bigraph) -> Optional[list]:
    """Event order making h an n-cyclic bigraph, or None.

    For a triangle base graph no variable may touch all three events."""
    order = cycle_order(base_graph(h))
    if order is None:
        return None
    if h.n_events == 3 and any(len(evs) == 3 for evs in h.var_nbrs):
        return None
    return order


# ---------------------------------------------------------------- JSON

def bigraph_to_json(h: Bigraph) -> dict:
    return {"events": h.n_events, "variables": h.n_variables,
            "edges": [[i + 1, j + 1] for i, j in h.edges]}


def bigraph_from_json(d: dict) -> Bigraph:
    try:
        return Bigraph(int(d["events"]), int(d["variables"]),
                       tuple((int(i) - 1, int(j) - 1) for i, j in d["edges"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed bigraph JSON: {exc}") from exc


def graph_to_json(g: DependencyGraph) -> dict:
    return {"vertices": g.n_vertices, "edges": [[u + 1, v + 1] for u, v in g.edges]}


def graph_from_json(d: dict) -> DependencyGraph:
    try:
        return DependencyGraph(int(d["vertices"]), tuple((int(u) - 1, int(v) - 1) for u, v in d["edges"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed graph JSON: {exc}") from exc

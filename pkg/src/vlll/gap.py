"""Gap classification, the known-instance catalog, graph-level predicates and
exclusive witnesses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx
from networkx.algorithms import isomorphism as nxiso

from .cycle import cycle_boundary_for_bigraph
from .cylinders import DiscreteCylinderSet
from .discrete import SearchConfig, vlll_boundary_lambda_bruteforce
from .errors import InvalidInputError
from .graphs import (Bigraph, CyclicEmbedding, DependencyGraph, base_graph, bigraph_isomorphism,
                     contains_cyclic, cyclic_order, is_chordal, is_connected, is_tree,
                     make_canonical_bigraph, make_combinatorial_bigraph, make_hstar)
from .numerics import as_direction
from .reductions import (DELETE_EDGE, DELETE_EVENT, DELETE_VARIABLE, DUPLICATE_VARIABLE, PRESERVES,
                         normalize)
from .shearer import abstract_boundary_lambda
from .tree import tree_boundary_lambda

GAPFUL, GAPLESS, UNKNOWN = "Gapful", "Gapless", "Unknown"


@dataclass(frozen=True)
class TraceStep:
    rule: str
    tag: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"rule": self.rule, "tag": self.tag, "params": self.params}


@dataclass(frozen=True)
class GapVerdict:
    status: str
    trace: tuple = ()
    witness: Optional[object] = None            # DiscreteCylinderSet or BoxWitness
    embedding: Optional[CyclicEmbedding] = None

    def to_json(self) -> dict:
        out = {"status": self.status, "trace": [s.to_json() for s in self.trace]}
        if self.embedding is not None:
            out["embedding"] = {"events": [e + 1 for e in self.embedding.event_map],
                                "variables": [j + 1 for j in self.embedding.variable_map]}
        if self.witness is not None:
            w = self.witness
            out["witness"] = w.to_json()
        return out


@dataclass(frozen=True)
class GapConfig:
    hn_max: int = 40                # largest H_{k,k-1} tried
    sparsification_c: int = 2       # H_{7c,5c} for c up to this
    max_events: int = 40            # catalog members above this size are skipped
    match_budget: int = 2_000       # base-graph embeddings examined per catalog member

    def __post_init__(self):
        for name in ("hn_max", "sparsification_c", "max_events", "match_budget"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be positive")


# ---------------------------------------------------------------- catalog

@dataclass(frozen=True)
class CatalogMember:
    name: str
    status: str
    bigraph: Bigraph                # already in normal form


def catalog(n_events: int, cfg: GapConfig = GapConfig()) -> list:
    """Members relevant to a normal form with n_events events."""
    out = [CatalogMember("H*", GAPFUL, normalize(make_hstar()).normal)]
    for c in range(1, cfg.sparsification_c + 1):
        if math.comb(7 * c, 5 * c) <= max(cfg.max_events, n_events):
            out.append(CatalogMember(f"H_{{{7 * c},{5 * c}}}", GAPFUL,
                                     normalize(make_combinatorial_bigraph(7 * c, 5 * c)).normal))
    # induced subgraphs of K_k are complete, so k far above n only adds a universal variable
    for k in range(max(4, n_events), min(cfg.hn_max, n_events + 2) + 1):
        out.append(CatalogMember(f"H_{{{k},{k - 1}}}", GAPLESS,
                                 normalize(make_combinatorial_bigraph(k, k - 1)).normal))
    return out


def _nx_base(h: Bigraph) -> nx.Graph:
    return base_graph(h).to_networkx()


def _embeddings(big: Bigraph, small: Bigraph, budget: int):
    """Induced embeddings of base(small) into base(big) as dicts big event -> small event."""
    gm = nxiso.GraphMatcher(_nx_base(big), _nx_base(small))
    for k, mapping in enumerate(gm.subgraph_isomorphisms_iter()):
        if k >= budget:
            return
        yield mapping


def _covered(nbhds, sup_nbhds) -> bool:
    """Every neighborhood with at least two events sits inside some member of sup_nbhds."""
    sups = [frozenset(s) for s in sup_nbhds]
    return all(any(a <= b for b in sups) for a in nbhds if len(a) >= 2)


def _gapful_route(h: Bigraph, m: Bigraph, budget: int) -> Optional[dict]:
    """Event subset S of h whose restriction is reachable from m by deleting edges and variables.

    Duplicating each variable of m onto the needed sub-neighborhood and then
    stripping the originals edge by edge keeps the base graph fixed."""
    if m.n_events > h.n_events:
        return None
    for mp in _embeddings(h, m, budget):
        nbhds = [frozenset(mp[e] for e in evs if e in mp) for evs in h.var_nbrs]
        if _covered(nbhds, m.var_nbrs):
            return {e: mp[e] for e in sorted(mp)}
    return None


def _gapless_route(h: Bigraph, m: Bigraph, budget: int) -> Optional[dict]:
    """h reachable from m by deleting events and adding edges (base graph fixed)."""
    if h.n_events > m.n_events:
        return None
    for mp in _embeddings(m, h, budget):
        nbhds = [frozenset(mp[e] for e in evs if e in mp) for evs in m.var_nbrs]
        if _covered(nbhds, h.var_nbrs):
            return {mp[e]: e for e in sorted(mp)}
    return None


_GAPFUL_ROUTE_OPS = [(DUPLICATE_VARIABLE, False), (DELETE_EDGE, False), (DELETE_VARIABLE, False),
                     (DELETE_VARIABLE, True), (DELETE_EVENT, True)]
_GAPLESS_ROUTE_OPS = [(DELETE_EVENT, False), (DELETE_VARIABLE, True), (DELETE_EDGE, True),
                      (DUPLICATE_VARIABLE, True)]


def _ops_json(ops) -> list:
    return [{"kind": k, "inverse": inv} for k, inv in ops]


# ---------------------------------------------------------------- classification

def classify_gap(h: Bigraph, cfg: GapConfig = GapConfig()) -> GapVerdict:
    if h.n_events == 0 or not is_connected(base_graph(h)):
        raise InvalidInputError("classification needs a connected base graph")
    norm = normalize(h)
    hn = norm.normal
    trace = [TraceStep("normalize", "reduction-invariance",
                       {"ops": [op.describe() for op in norm.trace],
                        "events": hn.n_events, "variables": hn.n_variables})]
    g = base_graph(hn)

    if is_tree(g):
        trace.append(TraceStep("treelike", "treelike-gapless", {"events": hn.n_events}))
        return GapVerdict(GAPLESS, tuple(trace))

    emb = contains_cyclic(hn)
    if emb is not None:
        ev = [norm.event_origin[e] for e in emb.event_map]
        var = [norm.variable_origin[j] for j in emb.variable_map]
        trace.append(TraceStep("cyclic-containment", "contains-cyclic-gapful",
                               {"length": emb.cycle_length, "events": [e + 1 for e in ev],
                                "variables": [j + 1 for j in var]}))
        return GapVerdict(GAPFUL, tuple(trace), embedding=CyclicEmbedding(tuple(ev), tuple(var)))

    if is_chordal(g):
        canon = normalize(make_canonical_bigraph(g)).normal
        if bigraph_isomorphism(hn, canon) is not None:
            trace.append(TraceStep("chordal-canonical", "chordal-canonical-gapless",
                                   {"cliques": canon.n_variables}))
            return GapVerdict(GAPLESS, tuple(trace))

    members = catalog(hn.n_events, cfg)
    for mem in members:
        if mem.bigraph.n_events == hn.n_events and bigraph_isomorphism(hn, mem.bigraph) is not None:
            trace.append(TraceStep("catalog", "catalog-" + mem.status.lower(), {"member": mem.name}))
            return GapVerdict(mem.status, tuple(trace))
    if hn.n_events <= cfg.max_events:
        for mem in members:
            if mem.status == GAPFUL:
                found = _gapful_route(hn, mem.bigraph, cfg.match_budget)
                if found is not None:
                    trace.append(TraceStep("catalog", "catalog-gapful", {"member": mem.name}))
                    trace.append(TraceStep("contains-sparsification", "gapful-propagation",
                                           {"member": mem.name, "ops": _ops_json(_GAPFUL_ROUTE_OPS),
                                            "event_map": {norm.event_origin[a] + 1: b + 1
                                                          for a, b in found.items()}}))
                    return GapVerdict(GAPFUL, tuple(trace))
            else:
                found = _gapless_route(hn, mem.bigraph, cfg.match_budget)
                if found is not None:
                    trace.append(TraceStep("catalog", "catalog-gapless", {"member": mem.name}))
                    trace.append(TraceStep("densification", "gapless-propagation",
                                           {"member": mem.name, "ops": _ops_json(_GAPLESS_ROUTE_OPS),
                                            "event_map": {norm.event_origin[a] + 1: b + 1
                                                          for a, b in found.items()}}))
                    return GapVerdict(GAPLESS, tuple(trace))
    trace.append(TraceStep("exhausted", "unknown", {"catalog": [m.name for m in members]}))
    return GapVerdict(UNKNOWN, tuple(trace))


def trace_respects_directions(v: GapVerdict) -> bool:
    """Every reduction kind named in the trace preserves the verdict's status."""
    if v.status == UNKNOWN:
        return True
    for step in v.trace:
        for op in step.params.get("ops", []):
            if v.status not in PRESERVES[(op["kind"], op["inverse"])]:
                return False
    return True


@dataclass(frozen=True)
class GraphClass:
    a_gapful: bool
    strongly_a_gapful: bool

    def to_json(self) -> dict:
        return {"a_gapful": self.a_gapful, "strongly_a_gapful": self.strongly_a_gapful}


def classify_graph(g: DependencyGraph) -> GraphClass:
    """Some bigraph over g is gapful iff g is not a tree; every one is iff g is not chordal."""
    if g.n_vertices == 0 or not is_connected(g):
        raise InvalidInputError("graph must be connected")
    return GraphClass(not is_tree(g), not is_chordal(g))


# ---------------------------------------------------------------- numeric check

@dataclass(frozen=True)
class NumericGap:
    lambda_abstract: float
    lambda_variable: float
    gapful_in_direction: bool
    method: str

    def to_json(self) -> dict:
        return {"lambda_abstract": self.lambda_abstract, "lambda_variable": self.lambda_variable,
                "gapful_in_direction": self.gapful_in_direction, "method": self.method}


def variable_boundary(h: Bigraph, direction: Sequence[float], search: SearchConfig = SearchConfig()):
    """Best applicable variable-LLL solver: tree, then cycle, then the discrete program."""
    g = base_graph(h)
    if is_tree(g):
        return tree_boundary_lambda(h, direction)
    if cyclic_order(h) is not None:
        return cycle_boundary_for_bigraph(h, direction)
    return vlll_boundary_lambda_bruteforce(h, direction, search)


def numeric_gap_check(h: Bigraph, direction: Sequence[float], search: SearchConfig = SearchConfig(),
                      margin: float = 1e-6) -> NumericGap:
    d = as_direction(direction, h.n_events)
    la = abstract_boundary_lambda(base_graph(h), d).lam
    res = variable_boundary(h, d, search)
    # the discrete program only resolves lambda to its own tolerance
    thr = max(margin, search.tol) if res.method == "discrete" else margin
    return NumericGap(la, res.lam, res.lam - la > thr, res.method)


# ---------------------------------------------------------------- witnesses

def small_exclusive_witness(h: Bigraph) -> DiscreteCylinderSet:
    """Every used axis cut into n equal pieces; event i owns piece i on each of its variables."""
    n = h.n_events
    parts = [tuple([1.0 / n] * n) if h.var_nbrs[j] else (1.0,) for j in range(h.n_variables)]
    return DiscreteCylinderSet.from_predicates(h, parts, lambda i, lab: all(v == i for v in lab.values()))


def h43_witness(p: Sequence[float], tol: float = 1e-9) -> DiscreteCylinderSet:
    """Exclusive cylinder set on H_{4,3} with measures p and union 1.

    Event e of H_{4,3} misses variable 3 - e. Events are ranked by
    decreasing p; the rank-r event misses the variable playing X_3, X_4, X_2,
    X_1 for r = 1..4."""
    p = as_direction(p, 4)
    if abs(math.fsum(p) - 1.0) > tol:
        raise InvalidInputError("h43 witness needs probabilities summing to 1")
    rank = sorted(range(4), key=lambda e: (-p[e], e))
    p1, p2, p3, p4 = (p[e] for e in rank)
    s = p1 + 4 * p3 * p4 - p3 - p4
    if s < -tol:
        raise InvalidInputError("sorted inputs must satisfy p1 >= p3 + p4 - 4 p3 p4")
    s = max(s, 0.0)
    role_miss = dict(zip(("X3", "X4", "X2", "X1"), (3 - e for e in rank)))
    x1, x2, x4 = role_miss["X1"], role_miss["X2"], role_miss["X4"]
    mid = s / (1 - 2 * p3)
    parts = [(1.0,)] * 4
    parts[x4] = (0.5, 0.5)
    parts[x1] = (2 * p3, 1 - 2 * p3)
    parts[x2] = (2 * p4, mid, max(0.0, 1.0 - 2 * p4 - mid))
    role_of = {e: r for r, e in enumerate(rank)}

    def member(e, lab):
        a, b, d = lab.get(x1), lab.get(x2), lab.get(x4)
        r = role_of[e]
        if r == 0:
            return ((d == 0 and b in (1, 2) and a == 0) or (d == 1 and b == 0 and a == 1)
                    or (a == 1 and b == 1))
        if r == 1:
            return a == 1 and b == 2
        if r == 2:
            return d == 1 and a == 0
        return d == 0 and b == 0

    return DiscreteCylinderSet.from_predicates(make_combinatorial_bigraph(4, 3), parts, member)

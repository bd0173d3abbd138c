"""Variable-LLL boundary of treelike bigraphs and the exclusive box witness."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cylinders import DiscreteCylinderSet
from .errors import InapplicableError, InvalidInputError, NonConvergenceError
from .graphs import Bigraph, DependencyGraph, base_graph, is_tree
from .numerics import as_direction, bisect_predicate
from .reductions import normalize
from .shearer import BoundaryResult


@dataclass(frozen=True)
class RootedTree:
    root: int
    parent: tuple           # parent[root] == -1
    children: tuple
    order: tuple            # BFS order from the root

    @classmethod
    def from_graph(cls, g: DependencyGraph, root: Optional[int] = None) -> "RootedTree":
        if not is_tree(g):
            raise InapplicableError("base graph is not a tree")
        if root is None:
            root = max(range(g.n_vertices), key=lambda v: (g.degree(v), -v))
        parent = [-1] * g.n_vertices
        children = [[] for _ in range(g.n_vertices)]
        order, seen = [root], {root}
        for v in order:
            for w in sorted(g.adj[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    children[v].append(w)
                    order.append(w)
        return cls(root, tuple(parent), tuple(tuple(c) for c in children), tuple(order))


def tree_recursion(t: RootedTree, p: Sequence[float]) -> tuple:
    """Forward recursion q_i = p_i / prod_children(1 - q_k) below the root.

    Returns (q, valid, residual) with residual = p_root - prod over the root's
    children of (1 - q_k); an exit from (0,1) makes valid False."""
    q = [0.0] * len(p)
    for v in reversed(t.order):
        if v == t.root:
            continue
        denom = 1.0
        for k in t.children[v]:
            denom *= 1.0 - q[k]
        if denom <= 0.0:
            return q, False, float("inf")
        q[v] = p[v] / denom
        if not 0.0 < q[v] < 1.0:
            return q, False, float("inf")
    prod = 1.0
    for k in t.children[t.root]:
        prod *= 1.0 - q[k]
    q[t.root] = p[t.root] / prod if prod > 0 else float("inf")
    return q, True, p[t.root] - prod


def _tree_of(h: Bigraph) -> DependencyGraph:
    g = base_graph(h)
    if not is_tree(g):
        raise InapplicableError("base graph is not a tree")
    return g


def tree_boundary_lambda(h: Bigraph, direction: Sequence[float], tol: float = 1e-10,
                         root: Optional[int] = None, max_iter: int = 200) -> BoundaryResult:
    d = as_direction(direction, h.n_events)
    t = RootedTree.from_graph(_tree_of(h), root)

    def inside(lam):
        _, valid, res = tree_recursion(t, [lam * x for x in d])
        return valid and res < 0

    lo, hi = 0.0, min(1.0 / x for x in d)
    if h.n_events == 1:
        # the interior is p < 1; rounding in 1/d * d can land either side
        return BoundaryResult(d, hi, (hi * d[0],), "tree", 0.0, {"root": t.root})
    if inside(hi):
        raise NonConvergenceError("upper bracket is not outside the interior")
    # bisect to float resolution; the bracket tolerance is implied
    lo, hi = bisect_predicate(inside, lo, hi, 0.0, max(max_iter, 1100))
    if hi - lo > tol:
        raise NonConvergenceError(f"bracket width {hi - lo} above {tol}")
    _, _, res = tree_recursion(t, [lo * x for x in d])
    vec = tuple(lo * x for x in d)
    return BoundaryResult(d, lo, vec, "tree", abs(res), {"root": t.root})


@dataclass(frozen=True)
class BoxWitness:
    """Per event, a list of boxes; a box maps variable -> (lo, hi) and leaves other axes free."""
    boxes: tuple
    cylinder_set: DiscreteCylinderSet
    q: tuple = ()

    def to_json(self) -> dict:
        return {"events": [{"event": i + 1,
                            "boxes": [{str(j + 1): [repr(lo), repr(hi)] for j, (lo, hi) in sorted(b.items())}
                                      for b in bs]}
                           for i, bs in enumerate(self.boxes)],
                "cylinder_set": self.cylinder_set.to_json()}

    @staticmethod
    def _box_volume(box: dict, axes) -> Fraction:
        vol = Fraction(1)
        for j in axes:
            lo, hi = box.get(j, (0.0, 1.0))
            vol *= max(Fraction(0), Fraction(hi) - Fraction(lo))
        return vol

    def exact_measures(self) -> tuple:
        # boxes of one event are disjoint by construction
        return tuple(sum((self._box_volume(b, b.keys()) for b in bs), Fraction(0)) for bs in self.boxes)

    def exact_overlaps(self, h: Bigraph) -> dict:
        out = {}
        for a, b in base_graph(h).edges:
            total = Fraction(0)
            for x in self.boxes[a]:
                for y in self.boxes[b]:
                    axes = set(x) | set(y)
                    inter = {}
                    for j in axes:
                        lx, hx = x.get(j, (0.0, 1.0))
                        ly, hy = y.get(j, (0.0, 1.0))
                        inter[j] = (max(Fraction(lx), Fraction(ly)), min(Fraction(hx), Fraction(hy)))
                    vol = Fraction(1)
                    for lo, hi in inter.values():
                        vol *= max(Fraction(0), hi - lo)
                    total += vol
            out[(a, b)] = total
        return out


def tree_witness(h: Bigraph, boundary: Sequence[float], tol: float = 1e-9,
                 root: Optional[int] = None) -> BoxWitness:
    p = as_direction(boundary, h.n_events)
    norm = normalize(h, variables_only=True)
    t = RootedTree.from_graph(_tree_of(norm.normal), root)
    q, valid, res = tree_recursion(t, p)
    if not valid or res > tol:
        raise InvalidInputError(f"boundary vector is inconsistent with the tree equations (residual {res:.3g})")
    # the single variable carrying each tree edge, in original indexing
    edge_var = {}
    for jn, evs in enumerate(norm.normal.var_nbrs):
        a, b = evs
        child = a if t.parent[a] == b else b
        edge_var[child] = norm.variable_origin[jn]
    kids = t.children[t.root]
    prod = 1.0
    for k in kids:
        prod *= 1.0 - q[k]
    shrink = min(1.0, p[t.root] / prod) if kids else p[t.root]
    parts = [(1.0,)] * h.n_variables
    for child, j in edge_var.items():
        parts[j] = (q[child], 1.0 - q[child])
    k0 = kids[0] if kids else None
    if k0 is not None:
        tail = 1.0 - q[k0]
        parts[edge_var[k0]] = (q[k0], shrink * tail, tail - shrink * tail)

    boxes = []
    for i in range(h.n_events):
        box = {}
        if i != t.root:
            box[edge_var[i]] = (0.0, q[i])
        for k in t.children[i]:
            box[edge_var[k]] = (q[k], 1.0)
        if i == t.root and k0 is not None:
            box[edge_var[k0]] = (q[k0], q[k0] + shrink * (1.0 - q[k0]))
        boxes.append((box,))

    def member(i, labels):
        if i != t.root and labels[edge_var[i]] != 0:
            return False
        for k in t.children[i]:
            if labels[edge_var[k]] == 0:
                return False
        if i == t.root and k0 is not None and labels[edge_var[k0]] != 1:
            return False
        if i == t.root and k0 is None:
            return True
        return True

    if k0 is None:
        # a lone event: one axis-free box of measure p_root, placed on its first variable
        nb = h.event_nbrs[t.root]
        if not nb:
            raise InvalidInputError("an isolated event without variables cannot carry a witness")
        parts[nb[0]] = (p[t.root], 1.0 - p[t.root])
        boxes[t.root] = ({nb[0]: (0.0, p[t.root])},)
        cs = DiscreteCylinderSet.from_predicates(h, parts, lambda i, lab: lab[nb[0]] == 0)
        return BoxWitness(tuple(boxes), cs, tuple(q))
    cs = DiscreteCylinderSet.from_predicates(h, parts, member)
    return BoxWitness(tuple(boxes), cs, tuple(q))

"""Shearer's criterion on a dependency graph and the abstract boundary along a ray.

q_S is the alternating sum over independent supersets of S. Two routes are
implemented: a superset (zeta) transform over the independent-set lattice,
and the vertex-removal recurrence for the independence polynomial,
q_S = p^S * Z(G - N[S], -p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapExceededError, InvalidInputError, NonConvergenceError
from .graphs import DependencyGraph, independent_masks, is_connected, INDEPENDENT_SET_CAP
from .numerics import as_direction, bisect_predicate

SUPERSET_MAX_N = 20
CROSS_CHECK_MAX_N = 12


@dataclass(frozen=True)
class ShearerReport:
    values: dict            # independent set (sorted tuple) -> q_S
    min_value: float
    min_set: tuple

    @property
    def q_empty(self) -> float:
        return self.values[()]

    def total(self) -> float:
        return math.fsum(self.values.values())


@dataclass(frozen=True)
class BoundaryResult:
    direction: tuple
    lam: float
    boundary_vector: tuple
    method: str
    residual: float
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"direction": list(self.direction), "lambda": self.lam,
               "boundary_vector": list(self.boundary_vector), "method": self.method,
               "residual": self.residual}
        out.update(self.info)
        return out


def _mask_tuple(mask: int) -> tuple:
    out, v = [], 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def _check_dims(g: DependencyGraph, p: Sequence[float]) -> np.ndarray:
    if len(p) != g.n_vertices:
        raise InvalidInputError(f"vector has {len(p)} entries, graph has {g.n_vertices} vertices")
    if g.n_vertices > INDEPENDENT_SET_CAP:
        raise CapExceededError(f"{g.n_vertices} vertices exceeds cap {INDEPENDENT_SET_CAP}")
    return np.asarray(p, dtype=float)


def superset_values(g: DependencyGraph, p: Sequence[float]) -> np.ndarray:
    """Array indexed by vertex mask: q_S for independent S, 0 elsewhere."""
    p = _check_dims(g, p)
    n = g.n_vertices
    if n > SUPERSET_MAX_N:
        raise CapExceededError(f"superset transform limited to {SUPERSET_MAX_N} vertices")
    f = np.zeros(1 << n)
    ok = np.zeros(1 << n, dtype=bool)
    f[0], ok[0] = 1.0, True
    idx = np.arange(1 << n)
    for b in range(n):
        lo = 1 << b
        low = idx[:lo]
        ok[lo:2 * lo] = ok[:lo] & ((low & g.adj_masks[b]) == 0)
        f[lo:2 * lo] = -p[b] * f[:lo]
    f[~ok] = 0.0
    # f[T] = (-1)^|T| p^T on independent T; sum over supersets
    for b in range(n):
        v = f.reshape(-1, 2, 1 << b)
        v[:, 0, :] += v[:, 1, :]
    parity = np.zeros(1 << n, dtype=np.int8)
    for b in range(n):
        parity[1 << b:2 << b] = parity[:1 << b] ^ 1
    q = np.where(parity == 1, -f, f)
    q[~ok] = 0.0
    return q


class _IndependencePolynomial:
    """Z(U) = sum over independent subsets T of U of prod(-p_T), memoized on U."""

    def __init__(self, g: DependencyGraph, p: np.ndarray):
        self.closed = [m | (1 << v) for v, m in enumerate(g.adj_masks)]
        self.p = [float(x) for x in p]
        self.memo = {0: 1.0}

    def __call__(self, mask: int) -> float:
        memo = self.memo
        if mask in memo:
            return memo[mask]
        stack = [mask]
        while stack:
            u = stack[-1]
            v = (u & -u).bit_length() - 1
            a, b = u & ~(1 << v), u & ~self.closed[v]
            missing = [x for x in (a, b) if x not in memo]
            if missing:
                stack.extend(missing)
                continue
            memo[u] = memo[a] - self.p[v] * memo[b]
            stack.pop()
        return memo[mask]


def recurrence_values(g: DependencyGraph, p: Sequence[float]) -> dict:
    """q_S by the vertex-removal recurrence, keyed by vertex mask."""
    p = _check_dims(g, p)
    z = _IndependencePolynomial(g, p)
    full = (1 << g.n_vertices) - 1
    out = {}
    for s in independent_masks(g):
        blocked, weight = 0, 1.0
        for v in _mask_tuple(s):
            blocked |= z.closed[v]
            weight *= p[v]
        out[s] = weight * z(full & ~blocked)
    return out


def direct_values(g: DependencyGraph, p: Sequence[float]) -> dict:
    """Literal superset sums with math.fsum; quadratic in the number of independent sets."""
    p = _check_dims(g, p)
    masks = independent_masks(g)
    weight = {}
    for t in masks:
        w = 1.0
        for v in _mask_tuple(t):
            w *= p[v]
        weight[t] = w
    out = {}
    for s in masks:
        k = bin(s).count("1")
        out[s] = math.fsum((-1) ** (bin(t).count("1") - k) * weight[t] for t in masks if t & s == s)
    return out


def shearer_values(g: DependencyGraph, p: Sequence[float], method: str = "auto") -> ShearerReport:
    n = g.n_vertices
    if method == "auto":
        method = "superset" if n <= SUPERSET_MAX_N else "recurrence"
    if method == "superset":
        arr = superset_values(g, p)
        vals = {s: float(arr[s]) for s in independent_masks(g)}
        if n <= CROSS_CHECK_MAX_N:
            other = recurrence_values(g, p)
            worst = max(abs(vals[s] - other[s]) for s in vals)
            if worst > 1e-9:
                raise NonConvergenceError(f"superset and recurrence routes disagree by {worst:.3g}")
    elif method == "recurrence":
        vals = recurrence_values(g, p)
    elif method == "direct":
        vals = direct_values(g, p)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    values = {_mask_tuple(s): v for s, v in vals.items()}
    min_set = min(values, key=lambda s: (values[s], len(s), s))
    return ShearerReport(values, values[min_set], min_set)


def _min_q(g: DependencyGraph, p: Sequence[float]) -> float:
    if g.n_vertices <= SUPERSET_MAX_N:
        return float(superset_values(g, p)[independent_masks(g)].min())
    return min(recurrence_values(g, p).values())


def in_abstract_interior(g: DependencyGraph, p: Sequence[float]) -> bool:
    p = _check_dims(g, p)
    if np.any(p <= 0):
        raise InvalidInputError("probabilities must be positive")
    if np.any(p >= 1.0):
        return False
    return _min_q(g, p) > 0


def abstract_boundary_lambda(g: DependencyGraph, direction: Sequence[float], tol: float = 1e-10,
                             max_iter: int = 200) -> BoundaryResult:
    d = as_direction(direction, g.n_vertices)
    if not is_connected(g):
        raise InvalidInputError("dependency graph must be connected")
    lo = 0.5 / sum(d)
    hi = min(1.0 / x for x in d)

    def inside(lam):
        return in_abstract_interior(g, [lam * x for x in d])

    if not inside(lo):
        raise NonConvergenceError("lower bracket is not interior")
    lo, hi = bisect_predicate(inside, lo, hi, tol, max_iter)
    lam = 0.5 * (lo + hi)
    vec = tuple(lam * x for x in d)
    residual = abs(_min_q(g, vec)) if max(vec) < 1 else 0.0
    return BoundaryResult(d, lam, vec, "shearer", residual, {"bracket": [lo, hi]})

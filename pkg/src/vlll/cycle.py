"""Variable-LLL boundary of cyclic bigraphs.

Positions follow the canonical H_n: event k uses variables k and k+1 (mod n),
so events k-1 and k share variable k. Rotation i starts the chain at event i
and breaks variable i.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

from .cylinders import DiscreteCylinderSet
from .errors import InapplicableError, InvalidInputError, NonConvergenceError
from .graphs import Bigraph, cyclic_order, make_cycle_bigraph
from .numerics import as_direction, bisect_predicate
from .shearer import BoundaryResult

LEFT_PROBE = 1e-6


def chain(p: Sequence[float], i: int, lam: float) -> tuple:
    """b_1..b_{n-1} for rotation i, and the terminal residual.

    An exit of some b from [0,1) returns (partial b, inf)."""
    n = len(p)
    b = [lam * p[i]]
    if not 0.0 <= b[0] < 1.0:
        return b, math.inf
    for c in range(2, n):
        nxt = lam * p[(i + c - 1) % n] / (1.0 - b[-1])
        b.append(nxt)
        if not 0.0 <= nxt < 1.0:
            return b, math.inf
    return b, b[-1] - (1.0 - lam * p[(i - 1) % n])


def cycle_chain_solve(p: Sequence[float], i: int, tol: float = 1e-12) -> Optional[float]:
    """Smallest positive root of the chain for rotation i (0-based), or None."""
    p = as_direction(p)
    n = len(p)
    if n < 3:
        raise InvalidInputError("cycles need at least 3 events")
    if not 0 <= i < n:
        raise InvalidInputError("rotation out of range")

    def inside(lam):
        return chain(p, i, lam)[1] < 0

    # beyond 1/p_i the first link already leaves [0,1)
    lo, hi = bisect_predicate(inside, 0.0, 1.0 / p[i], 0.0, 1100)
    _, r_hi = chain(p, i, hi)
    if math.isinf(r_hi) and hi - lo > tol:
        return None
    if math.isinf(r_hi):
        # the crossing sits at an exit of the chain, not at a root of r
        _, r_lo = chain(p, i, lo)
        if abs(r_lo) > 1e-9:
            return None
    # the residual is increasing while the chain is valid, so the first crossing is the minimum root
    if not chain(p, i, lo * (1.0 - LEFT_PROBE))[1] < 0:
        raise NonConvergenceError("left probe failed to certify the minimal root")
    return lo


def cycle_boundary_lambda(p: Sequence[float], tol: float = 1e-12) -> BoundaryResult:
    d = as_direction(p)
    best, best_i = None, None
    for i in range(len(d)):
        lam = cycle_chain_solve(d, i, tol)
        if lam is None:
            continue
        if best is None or lam < best * (1.0 - 1e-14):
            best, best_i = lam, i
    if best is None:
        raise NonConvergenceError("no rotation admits a valid chain solution")
    _, res = chain(d, best_i, best)
    vec = tuple(best * x for x in d)
    return BoundaryResult(d, best, vec, "cycle", abs(res), {"rotation": best_i + 1})


def cycle_boundary_for_bigraph(h: Bigraph, direction: Sequence[float], tol: float = 1e-12) -> BoundaryResult:
    """Same boundary for any n-cyclic bigraph, by walking its base cycle."""
    order = cyclic_order(h)
    if order is None:
        raise InapplicableError("bigraph is not cyclic")
    d = as_direction(direction, h.n_events)
    res = cycle_boundary_lambda([d[e] for e in order], tol)
    rot = order[res.info["rotation"] - 1]
    vec = tuple(res.lam * x for x in d)
    return BoundaryResult(d, res.lam, vec, "cycle", res.residual,
                          {"rotation": rot + 1, "cycle_order": [e + 1 for e in order]})


def triangle_closed_form(p: Sequence[float]) -> float:
    """min_i of the smaller root of p_i p_{i-1} x^2 - S x + 1 with S = sum(p).

    For S = 1 this is (1 - sqrt(1 - 4 p_i p_{i-1})) / (2 p_i p_{i-1})."""
    p = as_direction(p, 3)
    s = sum(p)
    out = math.inf
    for i in range(3):
        x = p[i] * p[i - 1]
        disc = s * s - 4.0 * x
        if disc < 0:
            raise InvalidInputError(f"negative discriminant for rotation {i + 1}")
        out = min(out, 2.0 / (s + math.sqrt(disc)))
    return out


def cycle_boundary_witness(p: Sequence[float], result: BoundaryResult) -> DiscreteCylinderSet:
    """Broken-cycle cylinder set on the canonical H_n with measures lambda * p.

    Variable i (the rotation) is unused. Event i takes the first piece of axis
    i+1; chain event i+c-1 takes the second piece of its left axis and the
    first piece of its right axis; event i-1 takes the second piece of axis i-1.
    """
    d = as_direction(p)
    n = len(d)
    if result.method != "cycle" or len(result.direction) != n:
        raise InvalidInputError("result does not come from the cycle solver for this direction")
    i = result.info["rotation"] - 1
    lam = result.lam
    b, res = chain(d, i, lam)
    if math.isinf(res) or abs(res) > 1e-9:
        raise InvalidInputError(f"result is inconsistent with the chain (residual {res})")
    h = make_cycle_bigraph(n)
    parts = [(1.0,)] * n
    for c in range(1, n):
        parts[(i + c) % n] = (b[c - 1], 1.0 - b[c - 1])

    def member(k, labels):
        c = (k - i) % n + 1          # event k is chain position c
        if c == 1:
            return labels[(i + 1) % n] == 0
        if c == n:
            return labels[(i - 1) % n] == 1
        return labels[k] == 1 and labels[(k + 1) % n] == 0

    return DiscreteCylinderSet.from_predicates(h, parts, member)


def cycle_gapful_witness(n: int) -> DiscreteCylinderSet:
    """A_i = {x_i >= 1/2, x_{i+1} < 1/2}: measures 1/4, exclusive, union 1 - 2^(1-n)."""
    h = make_cycle_bigraph(n)
    parts = [(0.5, 0.5)] * n
    return DiscreteCylinderSet.from_predicates(h, parts, lambda k, lab: lab[k] == 1 and lab[(k + 1) % n] == 0)

"""Small numeric helpers shared by the boundary solvers."""
from __future__ import annotations

from typing import Callable, Sequence

from .errors import InvalidInputError, NonConvergenceError


def bisect_predicate(inside: Callable[[float], bool], lo: float, hi: float,
                     tol: float = 0.0, max_iter: int = 200) -> tuple:
    """Shrink [lo, hi] around the switch of a monotone predicate.

    inside(lo) must hold and inside(hi) must fail. With tol=0 the loop runs
    until no float lies strictly between the ends."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            return lo, hi
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return lo, hi
        if inside(mid):
            lo = mid
        else:
            hi = mid
    if hi - lo <= tol:
        return lo, hi
    raise NonConvergenceError(f"bisection did not reach width {tol} in {max_iter} steps (width {hi - lo})")


def as_direction(values: Sequence[float], n: int = None) -> tuple:
    vals = tuple(float(v) for v in values)
    if n is not None and len(vals) != n:
        raise InvalidInputError(f"expected {n} entries, got {len(vals)}")
    if not vals or any(not v > 0 or v != v or v == float("inf") for v in vals):
        raise InvalidInputError("direction entries must be positive and finite")
    return vals


def clamp(p: Sequence[float]) -> tuple:
    """Entrywise min(1, p_i)."""
    return tuple(min(1.0, float(v)) for v in p)


def parse_vector(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse vector {text!r}") from exc

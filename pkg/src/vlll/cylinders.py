"""Discrete cylinder sets: per-axis interval partitions plus per-event cell indicators.

An event's indicator lives only on the grid of its own neighborhood (row-major,
variables in increasing order). Evaluation refines everything to the common
product grid.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapExceededError, InvalidInputError
from .graphs import Bigraph, base_graph

EVAL_CELL_CAP = 10 ** 7


@dataclass(frozen=True)
class DiscreteCylinderSet:
    partitions: tuple       # per variable: tuple of interval lengths summing to 1
    indicators: tuple       # per event: bool ndarray shaped by its neighborhood's partition sizes

    def __post_init__(self):
        parts = tuple(tuple(float(x) for x in row) for row in self.partitions)
        for j, row in enumerate(parts):
            if not row or any(x < 0 for x in row) or abs(math.fsum(row) - 1.0) > 1e-12:
                raise InvalidInputError(f"partition of variable {j} must be nonnegative and sum to 1")
        object.__setattr__(self, "partitions", parts)
        object.__setattr__(self, "indicators", tuple(np.asarray(t, dtype=bool) for t in self.indicators))

    @property
    def discreteness(self) -> tuple:
        return tuple(len(r) for r in self.partitions)

    def check_conforms(self, h: Bigraph) -> None:
        if len(self.partitions) != h.n_variables or len(self.indicators) != h.n_events:
            raise InvalidInputError("cylinder set size does not match the bigraph")
        for i, ind in enumerate(self.indicators):
            shape = tuple(len(self.partitions[j]) for j in h.event_nbrs[i])
            if ind.shape != shape:
                raise InvalidInputError(f"event {i}: indicator shape {ind.shape} != {shape}")

    @classmethod
    def from_predicates(cls, h: Bigraph, partitions: Sequence[Sequence[float]],
                        member: Callable[[int, dict], bool]) -> "DiscreteCylinderSet":
        """Build indicators from member(event, {variable: label}) over each event's local grid."""
        inds = []
        for i, nb in enumerate(h.event_nbrs):
            shape = tuple(len(partitions[j]) for j in nb)
            ind = np.zeros(shape, dtype=bool)
            for cell in itertools.product(*(range(s) for s in shape)):
                ind[cell] = bool(member(i, dict(zip(nb, cell))))
            inds.append(ind)
        return cls(tuple(tuple(r) for r in partitions), tuple(inds))

    def to_json(self) -> dict:
        return {"partitions": [list(r) for r in self.partitions],
                "indicators": [{"event": i + 1, "shape": list(t.shape),
                                "cells": [int(x) for x in t.reshape(-1)]}
                               for i, t in enumerate(self.indicators)]}

    @classmethod
    def from_json(cls, d: dict) -> "DiscreteCylinderSet":
        try:
            inds = sorted(d["indicators"], key=lambda r: r["event"])
            tensors = tuple(np.array(r["cells"], dtype=bool).reshape(r["shape"]) for r in inds)
            return cls(tuple(tuple(r) for r in d["partitions"]), tensors)
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidInputError(f"malformed cylinder set JSON: {exc}") from exc

    def same_as(self, other: "DiscreteCylinderSet") -> bool:
        return (self.partitions == other.partitions and len(self.indicators) == len(other.indicators)
                and all(a.shape == b.shape and np.array_equal(a, b)
                        for a, b in zip(self.indicators, other.indicators)))


@dataclass(frozen=True)
class Evaluation:
    measures: tuple
    union: float
    exclusive: bool
    overlaps: dict          # adjacent event pair -> overlap measure

    @property
    def max_overlap(self) -> float:
        return max(self.overlaps.values(), default=0.0)


def _broadcast(ind: np.ndarray, axes: Sequence[int], m: int) -> np.ndarray:
    """Reshape an event tensor over `axes` so it broadcasts on an m-axis grid."""
    shape = [1] * m
    for k, j in enumerate(axes):
        shape[j] = ind.shape[k]
    return ind.reshape(shape)


def _volume(partitions, axes) -> np.ndarray:
    vol = np.ones(())
    for j in axes:
        vol = np.multiply.outer(vol, np.asarray(partitions[j]))
    return vol


def event_measure(s: DiscreteCylinderSet, h: Bigraph, i: int) -> float:
    nb = h.event_nbrs[i]
    return float(np.sum(_volume(s.partitions, nb) * s.indicators[i]))


def evaluate_cylinder_set(s: DiscreteCylinderSet, h: Bigraph, cell_cap: int = EVAL_CELL_CAP,
                          overlap_tol: float = 0.0) -> Evaluation:
    s.check_conforms(h)
    used = sorted({j for nb in h.event_nbrs for j in nb})
    cells = math.prod(len(s.partitions[j]) for j in used)
    if cells > cell_cap:
        raise CapExceededError(f"{cells} cells exceeds evaluation cap {cell_cap}")
    measures = tuple(event_measure(s, h, i) for i in range(h.n_events))
    # union on the grid of used variables only (others integrate to 1)
    pos = {j: k for k, j in enumerate(used)}
    covered = np.zeros(tuple(len(s.partitions[j]) for j in used), dtype=bool)
    for i, nb in enumerate(h.event_nbrs):
        covered |= _broadcast(s.indicators[i], [pos[j] for j in nb], len(used))
    union = float(np.sum(_volume(s.partitions, used) * covered)) if used else float(covered)
    overlaps = {}
    for a, b in base_graph(h).edges:
        axes = sorted(set(h.event_nbrs[a]) | set(h.event_nbrs[b]))
        ap = {j: k for k, j in enumerate(axes)}
        both = (_broadcast(s.indicators[a], [ap[j] for j in h.event_nbrs[a]], len(axes))
                & _broadcast(s.indicators[b], [ap[j] for j in h.event_nbrs[b]], len(axes)))
        overlaps[(a, b)] = float(np.sum(_volume(s.partitions, axes) * both))
    exclusive = all(v <= overlap_tol for v in overlaps.values())
    return Evaluation(measures, union, exclusive, overlaps)

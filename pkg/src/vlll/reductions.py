"""The five bigraph reduction operations, their inverses, and normalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import InapplicableError
from .graphs import Bigraph, base_graph

DELETE_VARIABLE = "DeleteVariable"
DUPLICATE_EVENT = "DuplicateEvent"
DUPLICATE_VARIABLE = "DuplicateVariable"
DELETE_EDGE = "DeleteEdge"
DELETE_EVENT = "DeleteEvent"
KINDS = (DELETE_VARIABLE, DUPLICATE_EVENT, DUPLICATE_VARIABLE, DELETE_EDGE, DELETE_EVENT)

# which gap statuses survive an application, keyed by (kind, inverse)
PRESERVES = {
    (DELETE_VARIABLE, False): {"Gapful", "Gapless"}, (DELETE_VARIABLE, True): {"Gapful", "Gapless"},
    (DUPLICATE_EVENT, False): {"Gapful", "Gapless"}, (DUPLICATE_EVENT, True): {"Gapful", "Gapless"},
    (DUPLICATE_VARIABLE, False): {"Gapful", "Gapless"}, (DUPLICATE_VARIABLE, True): {"Gapful", "Gapless"},
    (DELETE_EDGE, False): {"Gapful"}, (DELETE_EDGE, True): {"Gapless"},
    (DELETE_EVENT, False): {"Gapless"}, (DELETE_EVENT, True): {"Gapful"},
}


@dataclass(frozen=True)
class ReductionOp:
    """One reduction step.

    Forward forms:
      DeleteVariable(variable)                      remove j with |N(j)| <= 1
      DuplicateEvent(event, position)               insert a copy of `event` at `position`
      DuplicateVariable(variable, neighborhood, position)
                                                    insert j' with N(j') = neighborhood <= N(j)
      DeleteEdge(event, variable)                   remove an edge, base graph unchanged
      DeleteEvent(event)                            remove an event
    Inverse forms:
      DeleteVariable(variable, neighborhood)        insert a variable with |N| <= 1
      DuplicateEvent(event, source)                 remove `event`, a twin of `source`
      DuplicateVariable(variable, source)           remove `variable`, N(variable) <= N(source)
      DeleteEdge(event, variable)                   add an edge, base graph unchanged
      DeleteEvent(event, neighborhood)              insert an event at index `event`
    """
    kind: str
    inverse: bool = False
    event: Optional[int] = None
    variable: Optional[int] = None
    neighborhood: Optional[tuple] = None
    position: Optional[int] = None
    source: Optional[int] = None

    @property
    def preserves(self) -> set:
        return PRESERVES[(self.kind, self.inverse)]

    def describe(self) -> dict:
        out = {"kind": self.kind, "inverse": self.inverse}
        for key in ("event", "variable", "neighborhood", "position", "source"):
            val = getattr(self, key)
            if val is not None:
                out[key] = list(val) if isinstance(val, tuple) else val
        return out


def _events_list(h: Bigraph) -> list:
    return [list(nb) for nb in h.event_nbrs]


def _drop_variable(nbhds: list, j: int) -> list:
    return [[v - (v > j) for v in nb if v != j] for nb in nbhds]


def _insert_variable(nbhds: list, j: int, members) -> list:
    out = [[v + (v >= j) for v in nb] for nb in nbhds]
    for i in members:
        out[i].append(j)
    return out


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InapplicableError(msg)


def apply_reduction(h: Bigraph, op: ReductionOp) -> Bigraph:
    nb = _events_list(h)
    n, m = h.n_events, h.n_variables
    k = op.kind
    if k == DELETE_VARIABLE and not op.inverse:
        j = op.variable
        _require(j is not None and 0 <= j < m, "variable out of range")
        _require(len(h.var_nbrs[j]) <= 1, f"variable {j} has {len(h.var_nbrs[j])} neighbors")
        return Bigraph.from_neighborhoods(_drop_variable(nb, j), m - 1)
    if k == DELETE_VARIABLE:
        j, members = op.variable, tuple(op.neighborhood or ())
        _require(j is not None and 0 <= j <= m, "insert position out of range")
        _require(len(members) <= 1 and all(0 <= i < n for i in members), "inserted variable needs <= 1 neighbor")
        return Bigraph.from_neighborhoods(_insert_variable(nb, j, members), m + 1)
    if k == DUPLICATE_EVENT and not op.inverse:
        i = op.event
        pos = n if op.position is None else op.position
        _require(i is not None and 0 <= i < n and 0 <= pos <= n, "event or position out of range")
        nb.insert(pos, list(nb[i]))
        return Bigraph.from_neighborhoods(nb, m)
    if k == DUPLICATE_EVENT:
        i, src = op.event, op.source
        _require(i is not None and src is not None and i != src and 0 <= i < n and 0 <= src < n,
                 "need two distinct events")
        _require(set(nb[i]) == set(nb[src]), f"events {i} and {src} are not twins")
        del nb[i]
        return Bigraph.from_neighborhoods(nb, m)
    if k == DUPLICATE_VARIABLE and not op.inverse:
        j = op.variable
        pos = m if op.position is None else op.position
        members = tuple(op.neighborhood if op.neighborhood is not None else h.var_nbrs[j])
        _require(j is not None and 0 <= j < m and 0 <= pos <= m, "variable or position out of range")
        _require(set(members) <= set(h.var_nbrs[j]), "new neighborhood must be inside N(j)")
        return Bigraph.from_neighborhoods(_insert_variable(nb, pos, members), m + 1)
    if k == DUPLICATE_VARIABLE:
        j, src = op.variable, op.source
        _require(j is not None and src is not None and j != src and 0 <= j < m and 0 <= src < m,
                 "need two distinct variables")
        _require(set(h.var_nbrs[j]) <= set(h.var_nbrs[src]), f"N({j}) is not inside N({src})")
        return Bigraph.from_neighborhoods(_drop_variable(nb, j), m - 1)
    if k == DELETE_EDGE:
        i, j = op.event, op.variable
        _require(i is not None and j is not None and 0 <= i < n and 0 <= j < m, "edge out of range")
        present = (i, j) in h.edge_set
        _require(present != op.inverse, "edge already absent" if not op.inverse else "edge already present")
        if op.inverse:
            nb[i].append(j)
        else:
            nb[i].remove(j)
        out = Bigraph.from_neighborhoods(nb, m)
        _require(base_graph(out) == base_graph(h), "edge change alters the base graph")
        return out
    if k == DELETE_EVENT and not op.inverse:
        i = op.event
        _require(i is not None and 0 <= i < n, "event out of range")
        del nb[i]
        return Bigraph.from_neighborhoods(nb, m)
    if k == DELETE_EVENT:
        i, members = op.event, list(op.neighborhood or ())
        _require(i is not None and 0 <= i <= n and all(0 <= j < m for j in members), "bad insertion")
        nb.insert(i, members)
        return Bigraph.from_neighborhoods(nb, m)
    raise InapplicableError(f"unknown reduction kind {k!r}")


def invert(op: ReductionOp, h: Bigraph) -> ReductionOp:
    """The op undoing `op` when `op` is applied to h."""
    k = op.kind
    if k == DELETE_VARIABLE and not op.inverse:
        return ReductionOp(k, True, variable=op.variable, neighborhood=tuple(h.var_nbrs[op.variable]))
    if k == DELETE_VARIABLE:
        return ReductionOp(k, False, variable=op.variable)
    if k == DUPLICATE_EVENT and not op.inverse:
        pos = h.n_events if op.position is None else op.position
        src = op.event + (op.event >= pos)
        return ReductionOp(k, True, event=pos, source=src)
    if k == DUPLICATE_EVENT:
        src = op.source - (op.source > op.event)
        return ReductionOp(k, False, event=src, position=op.event)
    if k == DUPLICATE_VARIABLE and not op.inverse:
        pos = h.n_variables if op.position is None else op.position
        return ReductionOp(k, True, variable=pos, source=op.variable + (op.variable >= pos))
    if k == DUPLICATE_VARIABLE:
        src = op.source - (op.source > op.variable)
        return ReductionOp(k, False, variable=src, neighborhood=tuple(h.var_nbrs[op.variable]),
                           position=op.variable)
    if k == DELETE_EDGE:
        return ReductionOp(k, not op.inverse, event=op.event, variable=op.variable)
    if k == DELETE_EVENT and not op.inverse:
        return ReductionOp(k, True, event=op.event, neighborhood=tuple(h.event_nbrs[op.event]))
    if k == DELETE_EVENT:
        return ReductionOp(k, False, event=op.event)
    raise InapplicableError(f"unknown reduction kind {k!r}")


@dataclass(frozen=True)
class Normalization:
    normal: Bigraph
    trace: tuple = field(default_factory=tuple)
    event_origin: tuple = ()        # normal event index -> original event index
    variable_origin: tuple = ()     # normal variable index -> original variable index


def _next_step(h: Bigraph, events_only: bool = False, variables_only: bool = False) -> Optional[ReductionOp]:
    if not events_only:
        for j, evs in enumerate(h.var_nbrs):
            if len(evs) <= 1:
                return ReductionOp(DELETE_VARIABLE, variable=j)
        sets = [set(evs) for evs in h.var_nbrs]
        for j in range(h.n_variables):
            for src in range(h.n_variables):
                if src == j or not sets[j] <= sets[src]:
                    continue
                if sets[j] == sets[src] and j < src:
                    continue  # of two equal variables the later one goes
                return ReductionOp(DUPLICATE_VARIABLE, True, variable=j, source=src)
    if not variables_only:
        seen = {}
        for i, nb in enumerate(h.event_nbrs):
            if nb in seen:
                return ReductionOp(DUPLICATE_EVENT, True, event=i, source=seen[nb])
            seen[nb] = i
    return None


def normalize(h: Bigraph, variables_only: bool = False) -> Normalization:
    """Fixpoint of the gap-preserving simplifications.

    With variables_only, duplicate events are kept (needed when event
    indices must survive, e.g. for boundary directions)."""
    trace = []
    ev_origin = list(range(h.n_events))
    var_origin = list(range(h.n_variables))
    while True:
        op = _next_step(h, variables_only=variables_only)
        if op is None:
            return Normalization(h, tuple(trace), tuple(ev_origin), tuple(var_origin))
        h = apply_reduction(h, op)
        trace.append(op)
        if op.kind == DUPLICATE_EVENT:
            del ev_origin[op.event]
        else:
            del var_origin[op.variable]

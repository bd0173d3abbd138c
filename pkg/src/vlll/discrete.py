"""Brute force over discrete cylinder sets.

Two searches share one engine:

* covering search (exterior membership and the boundary): every cell of the
  grid with d_j = deg(j) pieces per axis is claimed by some event;
* union search (MUP): d_j + 1 pieces, no covering requirement.

Indicators are enumerated exhaustively up to two sound reductions. A local
cell is only kept if some global extension of it is claimed by that event
alone (otherwise dropping it lowers a measure and changes nothing else), and
candidates are identified up to relabeling the pieces of each axis. Every
surviving candidate is scored on a simplex grid; the best ones are then
polished with multi-start Nelder-Mead on the product of simplices.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels as _k
from .cylinders import DiscreteCylinderSet, Evaluation, evaluate_cylinder_set
from .errors import CapExceededError, InvalidInputError, NonConvergenceError
from .graphs import Bigraph, base_graph, is_connected
from .numerics import as_direction
from .shearer import BoundaryResult


@dataclass(frozen=True)
class SearchConfig:
    cells_cap: int = 4096           # product grid size
    starts: int = 16                # Nelder-Mead starts per polished candidate
    tol: float = 1e-3               # lambda accuracy target for the boundary
    seed: int = 0
    node_budget: int = 5_000_000    # enumeration nodes
    local_cells_cap: int = 16       # cells in one event's own grid
    screen_points: int = 4096       # simplex grid points used for screening
    polish: int = 24                # candidates polished after screening
    symmetry_cap: int = 50_000      # largest relabeling group used for deduplication
    measure_tol: float = 1e-9
    threads: int = 1

    def __post_init__(self):
        for name in ("cells_cap", "starts", "node_budget", "local_cells_cap", "screen_points", "polish", "threads"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be positive")
        if not 0 < self.tol <= 1e-2:
            raise InvalidInputError("tol must lie in (0, 1e-2]")


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LLL_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------- grid bookkeeping

class _Grid:
    def __init__(self, h: Bigraph, dims: Sequence[int], cfg: SearchConfig):
        self.h = h
        self.dims = tuple(int(x) for x in dims)
        self.axes = [j for j in range(h.n_variables) if h.var_nbrs[j]]
        self.n_cells = math.prod(self.dims[j] for j in self.axes)
        if self.n_cells > cfg.cells_cap:
            raise CapExceededError(f"{self.n_cells} grid cells exceeds cap {cfg.cells_cap}")
        self.local = []
        for nb in h.event_nbrs:
            size = math.prod(self.dims[j] for j in nb)
            if size > cfg.local_cells_cap:
                raise CapExceededError(f"an event grid has {size} cells, cap {cfg.local_cells_cap}")
            self.local.append(size)
        apos = {j: k for k, j in enumerate(self.axes)}
        labels = np.array(list(itertools.product(*(range(self.dims[j]) for j in self.axes))),
                          dtype=np.int64).reshape(self.n_cells, len(self.axes))
        self.labels = labels
        self.slab = []
        for i, nb in enumerate(h.event_nbrs):
            proj = np.zeros(self.n_cells, dtype=np.int64)
            for j in nb:
                proj = proj * self.dims[j] + labels[:, apos[j]]
            rows = [0] * self.local[i]
            for g, k in enumerate(proj):
                rows[k] |= 1 << g
            self.slab.append(rows)
        self.full = (1 << self.n_cells) - 1
        self._cov = [None] * h.n_events

    def covers(self, i: int) -> list:
        """Bitset of global cells for every indicator mask of event i."""
        if self._cov[i] is None:
            slab = self.slab[i]
            cov = [0] * (1 << self.local[i])
            for x in range(1, len(cov)):
                low = x & -x
                cov[x] = cov[x ^ low] | slab[low.bit_length() - 1]
            self._cov[i] = cov
        return self._cov[i]

    def cover_of(self, row) -> int:
        u = 0
        for i, x in enumerate(row):
            u |= self.covers(i)[int(x)]
        return u


# ---------------------------------------------------------------- label symmetry

def _local_perm_table(dims: Sequence[int], perms: Sequence[Sequence[int]]) -> np.ndarray:
    """Indicator mask -> mask after relabeling each local axis by perms."""
    cells = list(itertools.product(*(range(d) for d in dims)))
    target = []
    for cell in cells:
        idx = 0
        for d, pm, c in zip(dims, perms, cell):
            idx = idx * d + pm[c]
        target.append(idx)
    x = np.arange(1 << len(cells), dtype=np.int64)
    out = np.zeros_like(x)
    for k, t in enumerate(target):
        out |= ((x >> k) & 1) << t
    return out


def _orbit_minima(grid: _Grid, event: int) -> list:
    """Lexicographically least mask in each relabeling orbit of one event's indicators."""
    nb = grid.h.event_nbrs[event]
    dims = [grid.dims[j] for j in nb]
    best = np.arange(1 << grid.local[event], dtype=np.int64)
    for perms in itertools.product(*(list(itertools.permutations(range(d))) for d in dims)):
        best = np.minimum(best, _local_perm_table(dims, perms))
    return sorted(set(best.tolist()))


def canonicalize(grid: _Grid, rows: np.ndarray, cap: int) -> np.ndarray:
    """Orbit representatives of candidate rows under axis relabelings."""
    if len(rows) == 0:
        return rows
    axes = grid.axes
    group = math.prod(math.factorial(grid.dims[j]) for j in axes)
    if group > cap:
        return np.unique(rows, axis=0)
    perm_lists = {j: list(itertools.permutations(range(grid.dims[j]))) for j in axes}
    tables = {}
    cur = rows.copy()
    ridx = np.arange(len(rows))
    for choice in itertools.product(*(range(len(perm_lists[j])) for j in axes)):
        pick = dict(zip(axes, choice))
        cand = np.empty_like(rows)
        for i, nb in enumerate(grid.h.event_nbrs):
            key = (i, tuple(pick[j] for j in nb))
            if key not in tables:
                tables[key] = _local_perm_table([grid.dims[j] for j in nb], [perm_lists[j][pick[j]] for j in nb])
            cand[:, i] = tables[key][rows[:, i]]
        diff = cand != cur
        first = np.argmax(diff, axis=1)
        less = diff.any(axis=1) & (cand[ridx, first] < cur[ridx, first])
        cur[less] = cand[less]
    return np.unique(cur, axis=0)


# ---------------------------------------------------------------- enumeration

def enumerate_candidates(grid: _Grid, cover: bool, cfg: SearchConfig) -> np.ndarray:
    """Exhaustive indicator assignments in which every kept local cell is essential.

    With cover=True every global cell must be claimed."""
    h = grid.h
    n = h.n_events
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    nodes = 0
    out = []
    slab = grid.slab
    first_reps = _orbit_minima(grid, 0) if n > 1 else None

    def essential_ok(chosen):
        covs = [grid.covers(e)[x] for e, x in enumerate(chosen)]
        for e, x in enumerate(chosen):
            others = 0
            for f, c in enumerate(covs):
                if f != e:
                    others |= c
            k = 0
            while x:
                if x & 1 and not (slab[e][k] & ~others):
                    return False
                x >>= 1
                k += 1
        return True

    def rec(chosen, union):
        nonlocal nodes
        e = len(chosen)
        nodes += 1
        if nodes > cfg.node_budget:
            raise CapExceededError(f"enumeration exceeded {cfg.node_budget} nodes")
        if e == n - 1:
            free = grid.full & ~union
            allowed = [k for k in range(grid.local[e]) if slab[e][k] & free]
            required = 0
            if cover:
                required = sum(1 << k for k in allowed)   # free cells need this event
                allowed_opt = []
            else:
                allowed_opt = allowed
            # cells whose slab is already covered can never be essential
            for r in range(len(allowed_opt) + 1):
                for sub in itertools.combinations(allowed_opt, r):
                    x = required | sum(1 << k for k in sub)
                    cand = chosen + [x]
                    nodes += 1
                    if essential_ok(cand):
                        out.append(cand)
            if nodes > cfg.node_budget:
                raise CapExceededError(f"enumeration exceeded {cfg.node_budget} nodes")
            return
        masks = first_reps if e == 0 else range(1 << grid.local[e])
        cov = grid.covers(e)
        for x in masks:
            cand = chosen + [x]
            if essential_ok(cand):
                rec(cand, union | cov[x])

    if n == 1:
        rec_single = []
        for x in range(1 << grid.local[0]):
            if cover and grid.covers(0)[x] != grid.full:
                continue
            if essential_ok([x]):
                rec_single.append([x])
        out = rec_single
    else:
        rec([], 0)
    return np.array(out, dtype=np.int64).reshape(len(out), n)


# ---------------------------------------------------------------- continuous part

def _compositions(total: int, parts: int) -> np.ndarray:
    out = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        out.append(row)
    return np.array(out, dtype=float) / total


def _screen_grid(grid: _Grid, budget: int) -> dict:
    """Per-axis simplex grids at the finest resolution fitting the point budget."""
    best = 1
    for r in range(1, 65):
        size = math.prod(math.comb(r + grid.dims[j] - 1, grid.dims[j] - 1) for j in grid.axes)
        if size > budget and r > 1:
            break
        best = r
    pts = {j: _compositions(best, grid.dims[j]) if grid.dims[j] > 1 else np.ones((1, 1)) for j in grid.axes}
    sizes = [len(pts[j]) for j in grid.axes]
    index = np.array(list(itertools.product(*(range(s) for s in sizes))), dtype=np.int64).reshape(-1, len(sizes))
    return {"res": best, "points": pts, "index": index}


def _local_volumes(grid: _Grid, sg: dict, axes: Sequence[int]) -> np.ndarray:
    apos = {j: k for k, j in enumerate(grid.axes)}
    idx = sg["index"]
    vol = np.ones((len(idx), 1))
    for j in axes:
        xj = sg["points"][j][idx[:, apos[j]]]
        vol = (vol[:, :, None] * xj[:, None, :]).reshape(len(idx), -1)
    return vol


def _bits(rows: np.ndarray, width: int) -> np.ndarray:
    """Unpack integer masks into a (len(rows), width) 0/1 float matrix."""
    k = np.arange(width, dtype=np.int64)
    return ((rows[:, None] >> k[None, :]) & 1).astype(float)


def _big_bits(masks: Sequence[int], width: int) -> np.ndarray:
    nbytes = max(1, (width + 7) // 8)
    raw = np.frombuffer(b"".join(int(m).to_bytes(nbytes, "little") for m in masks), dtype=np.uint8)
    return np.unpackbits(raw.reshape(len(masks), nbytes), axis=1, bitorder="little")[:, :width].astype(float)


@dataclass
class _Candidate:
    row: tuple
    screen: float
    screen_point: Optional[np.ndarray] = None   # flattened x at the best grid point
    value: Optional[float] = None
    x: Optional[list] = None
    polished: bool = False
    exclusive: Optional[bool] = None
    max_overlap: Optional[float] = None


class _Evaluator:
    """Measures and union of one indicator assignment as functions of the partitions.

    Each claimed cell is a monomial in the flat coordinate vector; evaluation
    gathers, multiplies and sums per event in a few array operations."""

    def __init__(self, grid: _Grid, row: Sequence[int], with_union: bool = False):
        self.grid = grid
        h = grid.h
        self.nb = h.event_nbrs
        self.sizes = [grid.dims[j] for j in grid.axes]
        self.offsets = np.cumsum([0] + self.sizes)
        self.total = int(self.offsets[-1])
        apos = {j: k for k, j in enumerate(grid.axes)}
        self.tensors = []
        idx_rows, owner = [], []
        width = max([len(nb) for nb in self.nb] + [1])
        for i, x in enumerate(row):
            shape = tuple(grid.dims[j] for j in self.nb[i])
            flat = _bits(np.array([x]), grid.local[i])[0]
            self.tensors.append(flat.reshape(shape) if shape else flat.reshape(()))
            for cell in zip(*np.nonzero(flat.reshape(shape))) if shape else ([()] if flat[0] else []):
                ids = [self.offsets[apos[j]] + c for j, c in zip(self.nb[i], cell)]
                idx_rows.append(ids + [self.total] * (width - len(ids)))
                owner.append(i)
        self.idx = np.array(idx_rows, dtype=np.int64).reshape(len(idx_rows), width)
        self.owner = np.array(owner, dtype=np.int64)
        self.n = h.n_events
        self.uidx = None
        if with_union:
            cov = _big_bits([grid.cover_of(row)], grid.n_cells)[0].astype(bool)
            lab = grid.labels[cov]
            self.uidx = (lab + self.offsets[:-1][None, :]).astype(np.int64)
        self.starts = self.offsets[:-1]
        self.axis_of = np.repeat(np.arange(len(self.sizes)), self.sizes)

    def flat(self, y: np.ndarray) -> np.ndarray:
        """Projected coordinates |y| renormalized per axis, with a trailing 1 for padding."""
        a = np.abs(np.asarray(y, dtype=float))
        sums = np.add.reduceat(a, self.starts) if self.total else np.zeros(0)
        bad = sums <= 0
        if np.any(bad):
            a = a.copy()
            for k in np.nonzero(bad)[0]:
                a[self.offsets[k]:self.offsets[k + 1]] = 1.0
            sums = np.add.reduceat(a, self.starts)
        return np.append(a / sums[self.axis_of], 1.0)

    def measures_flat(self, xf: np.ndarray) -> np.ndarray:
        if len(self.idx) == 0:
            return np.zeros(self.n)
        return np.bincount(self.owner, weights=xf[self.idx].prod(axis=1), minlength=self.n)

    def union_flat(self, xf: np.ndarray) -> float:
        if self.uidx is None or len(self.uidx) == 0:
            return 0.0 if self.uidx is not None else float("nan")
        return float(xf[self.uidx].prod(axis=1).sum())

    def split(self, y: np.ndarray) -> dict:
        xf = self.flat(y)
        return {j: xf[self.offsets[k]:self.offsets[k + 1]] for k, j in enumerate(self.grid.axes)}

    def cylinder_set(self, xs: dict) -> DiscreteCylinderSet:
        parts = []
        for j in range(self.grid.h.n_variables):
            if j in xs:
                v = np.clip(np.asarray(xs[j], dtype=float), 0.0, None)
                v = v / v.sum()
                row = [float(a) for a in v]
                # the last piece absorbs rounding so each row sums to 1 within 1e-12
                row[-1] = max(0.0, 1.0 - math.fsum(row[:-1]))
                parts.append(tuple(row))
            else:
                parts.append((1.0,))
        return DiscreteCylinderSet(tuple(parts), tuple(t.astype(bool) for t in self.tensors))


def _nelder_mead(ev: _Evaluator, kind: int, target, penalty: float, starts: Sequence[np.ndarray]) -> tuple:
    offsets = np.asarray(ev.offsets, dtype=np.int64)
    uidx = ev.uidx if ev.uidx is not None else np.zeros((0, 1), dtype=np.int64)
    args = (kind, offsets, ev.idx, ev.owner, ev.n, np.ascontiguousarray(uidx, dtype=np.int64),
            np.asarray(target, dtype=float), float(penalty))
    maxiter = 300 * max(1, ev.total)
    best_f, best_y = math.inf, None
    for y0 in starts:
        y = np.asarray(y0, dtype=float)
        f = _k.objective(y, *args)
        for _ in range(3):       # restarts shake off simplex collapse on the kinked objective
            fn, yn = _k.nelder_mead(y, *args, maxiter, 1e-10, 1e-13)
            if fn < f - 1e-15:
                f, y = float(fn), yn
            else:
                break
        if f < best_f:
            best_f, best_y = f, y
    return best_f, best_y


def _start_points(ev: _Evaluator, first: Optional[np.ndarray], count: int, rng: np.random.Generator) -> list:
    total = int(ev.offsets[-1])
    pts = [] if first is None else [np.asarray(first, dtype=float)]
    pts.append(np.concatenate([np.full(s, 1.0 / s) for s in ev.sizes]) if total else np.zeros(0))
    while len(pts) < count:
        pts.append(np.concatenate([rng.dirichlet(np.ones(s)) for s in ev.sizes]))
    return pts[:count]


def _polish_ratio(args) -> tuple:
    grid, row, direction, first, starts, seed = args
    ev = _Evaluator(grid, row)
    rng = np.random.default_rng(seed)
    f, y = _nelder_mead(ev, _k.RATIO, direction, 0.0, _start_points(ev, first, starts, rng))
    return f, [float(v) for v in y]


def _polish_union(args) -> tuple:
    grid, row, p, first, starts, seed, penalty = args
    ev = _Evaluator(grid, row, with_union=True)
    rng = np.random.default_rng(seed)
    f, y = _nelder_mead(ev, _k.UNION, p, penalty, _start_points(ev, first, starts, rng))
    return f, [float(v) for v in y]


def _run(tasks, fn, threads: int) -> list:
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _flat_point(grid: _Grid, sg: dict, p_index: int) -> np.ndarray:
    idx = sg["index"][p_index]
    return np.concatenate([sg["points"][j][idx[k]] for k, j in enumerate(grid.axes)])


# ---------------------------------------------------------------- covering search

@dataclass(frozen=True)
class MembershipCertificate:
    cylinder_set: DiscreteCylinderSet
    slack: tuple
    coverage_ok: bool
    ratio: float = 0.0          # max_i measure_i / q_i at the certificate


@dataclass(frozen=True)
class CoveringSearch:
    ratio: float                # min over candidates of min_x max_i measure_i / dir_i
    certificate: MembershipCertificate
    candidates: int
    polished: int
    screen_resolution: int
    nodes_note: str = ""


def _require_connected(h: Bigraph) -> None:
    if h.n_events == 0 or not is_connected(base_graph(h)):
        raise InvalidInputError("boundary solvers need a connected base graph")


def covering_search(h: Bigraph, direction: Sequence[float], cfg: SearchConfig = SearchConfig(),
                    stop_below: Optional[float] = None) -> CoveringSearch:
    """Smallest achievable max_i measure_i / direction_i over covering cylinder sets."""
    d = as_direction(direction, h.n_events)
    dims = [max(1, h.var_degree(j)) for j in range(h.n_variables)]
    grid = _Grid(h, dims, cfg)
    rows = canonicalize(grid, enumerate_candidates(grid, True, cfg), cfg.symmetry_cap)
    if len(rows) == 0:
        raise NonConvergenceError("no covering indicator assignment exists")
    sg = _screen_grid(grid, cfg.screen_points)
    dv = np.asarray(d)
    cands = []
    chunk = max(1, 2_000_000 // max(1, len(sg["index"])))
    vols = [_local_volumes(grid, sg, nb) for nb in h.event_nbrs]
    for s in range(0, len(rows), chunk):
        block = rows[s:s + chunk]
        ratio = None
        for i in range(h.n_events):
            m = vols[i] @ _bits(block[:, i], grid.local[i]).T
            r = m / dv[i]
            ratio = r if ratio is None else np.maximum(ratio, r)
        arg = np.argmin(ratio, axis=0)
        for k, row in enumerate(block):
            cands.append(_Candidate(tuple(int(v) for v in row), float(ratio[arg[k], k]),
                                    _flat_point(grid, sg, int(arg[k]))))
    cands.sort(key=lambda c: (c.screen, c.row))
    chosen = cands[:cfg.polish]
    tasks = [(grid, c.row, d, c.screen_point, cfg.starts, cfg.seed + k) for k, c in enumerate(chosen)]
    results = []
    if stop_below is None:
        results = _run(tasks, _polish_ratio, cfg.threads)
    else:
        for t in tasks:
            results.append(_polish_ratio(t))
            if results[-1][0] <= stop_below:
                break
    best = None
    for c, (f, y) in zip(chosen, results):
        c.value, c.x, c.polished = min(f, c.screen), y, True
        if f > c.screen:  # the grid point itself was better
            c.x = list(c.screen_point)
        if best is None or c.value < best.value:
            best = c
    ev = _Evaluator(grid, best.row)
    xs = ev.split(np.asarray(best.x))
    cs = ev.cylinder_set(xs)
    meas = evaluate_cylinder_set(cs, h).measures
    ratio = max(m / x for m, x in zip(meas, d))
    slack = tuple(ratio * x - m for m, x in zip(meas, d))
    cert = MembershipCertificate(cs, slack, grid.cover_of(best.row) == grid.full, ratio)
    return CoveringSearch(ratio, cert, len(rows), len(results), sg["res"])


def exterior_membership(h: Bigraph, q: Sequence[float], cfg: SearchConfig = SearchConfig(),
                        ratio_tol: float = 1e-9) -> Optional[MembershipCertificate]:
    """A covering cylinder set with measures <= q, or None if the search finds none."""
    _require_connected(h)
    q = as_direction(q, h.n_events)
    found = covering_search(h, q, cfg, stop_below=1.0)
    if found.ratio > 1.0 + ratio_tol:
        return None
    cert = found.certificate
    meas = evaluate_cylinder_set(cert.cylinder_set, h).measures
    return replace(cert, slack=tuple(a - m for a, m in zip(q, meas)))


def vlll_boundary_lambda_bruteforce(h: Bigraph, direction: Sequence[float],
                                    cfg: SearchConfig = SearchConfig()) -> BoundaryResult:
    """lambda* = min over covering sets of max_i measure_i / direction_i.

    By homogeneity this is the limit of bisecting on exterior membership of
    lambda * direction, computed in one pass."""
    _require_connected(h)
    d = as_direction(direction, h.n_events)
    found = covering_search(h, d, cfg)
    lam = found.ratio
    meas = evaluate_cylinder_set(found.certificate.cylinder_set, h).measures
    residual = max(0.0, max(m - lam * x for m, x in zip(meas, d)))
    return BoundaryResult(d, lam, tuple(lam * x for x in d), "discrete", residual,
                          {"candidates": found.candidates, "polished": found.polished,
                           "screen_resolution": found.screen_resolution,
                           "witness": found.certificate.cylinder_set.to_json()})


# ---------------------------------------------------------------- maximum union probability

@dataclass(frozen=True)
class MupResult:
    value: float
    cylinder_set: DiscreteCylinderSet
    evaluation: Evaluation
    exclusive: bool
    candidates: tuple       # (value, exclusive, polished) per canonical candidate
    margin: Optional[float]  # best value minus the best non-exclusive value


def mup_bruteforce(h: Bigraph, p: Sequence[float], cfg: SearchConfig = SearchConfig(),
                   overlap_tol: float = 1e-9) -> MupResult:
    """Largest union over (deg+1)-discrete cylinder sets with measures <= p."""
    p = as_direction(p, h.n_events)
    if any(x > 1 for x in p):
        raise InvalidInputError("probabilities must lie in (0,1]")
    dims = [h.var_degree(j) + 1 for j in range(h.n_variables)]
    grid = _Grid(h, dims, cfg)
    rows = canonicalize(grid, enumerate_candidates(grid, False, cfg), cfg.symmetry_cap)
    sg = _screen_grid(grid, cfg.screen_points)
    pv = np.asarray(p)
    gvol = _local_volumes(grid, sg, grid.axes)            # (P, G)
    vols = [_local_volumes(grid, sg, nb) for nb in h.event_nbrs]
    pairs = base_graph(h).edges
    cands = []
    chunk = max(1, 1_000_000 // max(1, len(sg["index"])))
    small = grid.n_cells <= 62
    cov_tab = [np.array(grid.covers(i), dtype=np.int64) if small else None for i in range(h.n_events)]
    for s in range(0, len(rows), chunk):
        block = rows[s:s + chunk]
        feasible = np.ones((len(gvol), len(block)), dtype=bool)
        for i in range(h.n_events):
            feasible &= (vols[i] @ _bits(block[:, i], grid.local[i]).T) <= pv[i] + 1e-12
        if small:
            covs = [cov_tab[i][block[:, i]] for i in range(h.n_events)]
            union_bits = _bits(np.bitwise_or.reduce(np.stack(covs), axis=0), grid.n_cells)
        else:
            covs = [[grid.covers(i)[int(x)] for x in block[:, i]] for i in range(h.n_events)]
            union_bits = _big_bits([grid.cover_of(r) for r in block], grid.n_cells)
        u = np.where(feasible, gvol @ union_bits.T, -np.inf)
        arg = np.argmax(u, axis=0)
        at = gvol[arg]                                      # best grid volumes per candidate
        ov = np.zeros(len(block))
        for a, b in pairs:
            if small:
                both = _bits(covs[a] & covs[b], grid.n_cells)
            else:
                both = _big_bits([x & y for x, y in zip(covs[a], covs[b])], grid.n_cells)
            ov = np.maximum(ov, np.einsum("kg,kg->k", at, both))
        for k, row in enumerate(block):
            val = float(u[arg[k], k])
            c = _Candidate(tuple(int(v) for v in row), val, _flat_point(grid, sg, int(arg[k])))
            c.value, c.x, c.max_overlap = val, list(c.screen_point), float(ov[k])
            c.exclusive = ov[k] <= overlap_tol
            cands.append(c)
    cands.sort(key=lambda c: (-c.screen, c.row))
    chosen = cands[:cfg.polish]
    tasks = [(grid, c.row, p, c.screen_point, cfg.starts, cfg.seed + k, 4.0) for k, c in enumerate(chosen)]
    for c, (f, y) in zip(chosen, _run(tasks, _polish_union, cfg.threads)):
        ev = _Evaluator(grid, c.row)
        xs = ev.split(np.asarray(y))
        cs = ev.cylinder_set(xs)
        e = evaluate_cylinder_set(cs, h)
        c.polished = True
        if max(m - t for m, t in zip(e.measures, p)) <= cfg.measure_tol and e.union > c.value:
            c.value, c.x, c.max_overlap = e.union, y, e.max_overlap
            c.exclusive = e.max_overlap <= overlap_tol
    best = max(cands, key=lambda c: (c.value, c.exclusive))
    ev = _Evaluator(grid, best.row)
    cs = ev.cylinder_set(ev.split(np.asarray(best.x)))
    e = evaluate_cylinder_set(cs, h)
    non_excl = [c.value for c in cands if not c.exclusive and c.value > -math.inf]
    margin = best.value - max(non_excl) if non_excl else None
    table = tuple((c.value, bool(c.exclusive), c.polished) for c in cands)
    return MupResult(best.value, cs, e, e.max_overlap <= overlap_tol, table, margin)

"""Independent reference implementations used by the tests.

Nothing here imports the package's algorithms; only the plain data types.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction


def independent_subsets(n, edges):
    adj = {frozenset(e) for e in edges}
    out = []
    for r in range(n + 1):
        for s in itertools.combinations(range(n), r):
            if all(frozenset(pair) not in adj for pair in itertools.combinations(s, 2)):
                out.append(s)
    return out


def shearer_q(n, edges, p):
    """q_S = sum over independent T containing S of (-1)^{|T-S|} prod_T p."""
    ind = independent_subsets(n, edges)
    q = {}
    for s in ind:
        terms = []
        for t in ind:
            if set(s) <= set(t):
                terms.append((-1) ** (len(t) - len(s)) * math.prod(p[i] for i in t))
        q[s] = math.fsum(terms)
    return q


def shearer_interior(n, edges, p):
    return all(x < 1 for x in p) and min(shearer_q(n, edges, p).values()) > 0


def scalar_bisect(f, lo, hi, iters=200):
    """Root of f on [lo, hi] with f(lo) < 0 < f(hi)."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def abstract_lambda(n, edges, d, iters=80):
    lo, hi = 0.0, min(1.0 / x for x in d)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if shearer_interior(n, edges, [mid * x for x in d]):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def has_induced_cycle(n, edges, min_len=4):
    """Brute force over vertex subsets: some subset induces a cycle of length >= min_len."""
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    for r in range(min_len, n + 1):
        for s in itertools.combinations(range(n), r):
            ss = set(s)
            if any(len(adj[v] & ss) != 2 for v in s):
                continue
            # 2-regular: connected means a single cycle
            seen, stack = {s[0]}, [s[0]]
            while stack:
                v = stack.pop()
                for w in adj[v] & ss:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) == r:
                return True
    return False


def contains_cycle_bigraph(event_nbrs, n_vars, max_len=None):
    """The containment definition checked literally against H_k for every k.

    Condition two is read with i != k: a variable outside the image may not
    be shared by two image events."""
    n = len(event_nbrs)
    nb = [set(x) for x in event_nbrs]
    top = n if max_len is None else min(n, max_len)
    for k in range(3, top + 1):
        for ev in itertools.permutations(range(n), k):
            if ev[0] != min(ev):
                continue
            for vr in itertools.permutations(range(n_vars), k):
                ok = True
                for c in range(k):
                    for t in range(k):
                        if (vr[t] in nb[ev[c]]) != (t in (c, (c + 1) % k)):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    continue
                rest = set(range(n_vars)) - set(vr)
                if all(sum(1 for e in ev if j in nb[e]) < 2 for j in rest):
                    return True
    return False


def exact_cell_measures(partitions, event_nbrs, member):
    """Measures, union and pairwise overlaps by enumerating every global cell in Fractions."""
    m = len(partitions)
    n = len(event_nbrs)
    fr = [[Fraction(x) for x in row] for row in partitions]
    meas = [Fraction(0)] * n
    union = Fraction(0)
    over = {}
    for cell in itertools.product(*(range(len(r)) for r in partitions)):
        vol = Fraction(1)
        for j in range(m):
            vol *= fr[j][cell[j]]
        hits = [i for i in range(n) if member(i, cell)]
        for i in hits:
            meas[i] += vol
        if hits:
            union += vol
        for a, b in itertools.combinations(hits, 2):
            over[(a, b)] = over.get((a, b), Fraction(0)) + vol
    return meas, union, over

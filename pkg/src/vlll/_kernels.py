"""Compiled objective and Nelder-Mead loop for the discrete program.

The objective sees a flat coordinate vector laid out axis after axis; it is
projected onto the product of simplices as |y| renormalized per axis.
"""
from __future__ import annotations

import numpy as np
from numba import njit

RATIO, UNION = 0, 1


@njit(cache=True)
def project(y, offsets):
    """|y| renormalized per axis, with a trailing 1.0 used as index padding."""
    k = len(offsets) - 1
    out = np.empty(len(y) + 1)
    for a in range(k):
        s = 0.0
        for t in range(offsets[a], offsets[a + 1]):
            out[t] = abs(y[t])
            s += out[t]
        if s <= 0.0:
            w = 1.0 / (offsets[a + 1] - offsets[a])
            for t in range(offsets[a], offsets[a + 1]):
                out[t] = w
        else:
            for t in range(offsets[a], offsets[a + 1]):
                out[t] /= s
    out[len(y)] = 1.0
    return out


@njit(cache=True)
def objective(y, kind, offsets, idx, owner, n, uidx, target, penalty):
    xf = project(y, offsets)
    m = np.zeros(n)
    for r in range(idx.shape[0]):
        v = 1.0
        for c in range(idx.shape[1]):
            v *= xf[idx[r, c]]
        m[owner[r]] += v
    if kind == RATIO:
        best = 0.0
        for i in range(n):
            best = max(best, m[i] / target[i])
        return best
    u = 0.0
    for r in range(uidx.shape[0]):
        v = 1.0
        for c in range(uidx.shape[1]):
            v *= xf[uidx[r, c]]
        u += v
    viol = 0.0
    for i in range(n):
        if m[i] > target[i]:
            viol += m[i] - target[i]
    return -u + penalty * viol


@njit(cache=True)
def nelder_mead(y0, kind, offsets, idx, owner, n, uidx, target, penalty, maxiter, xatol, fatol):
    """Nelder-Mead with the same initial simplex and (adaptive) coefficients as SciPy."""
    dim = len(y0)
    if dim == 0:
        return objective(y0, kind, offsets, idx, owner, n, uidx, target, penalty), y0.copy()
    if dim > 4:
        rho, chi, psi, sigma = 1.0, 1.0 + 2.0 / dim, 0.75 - 1.0 / (2.0 * dim), 1.0 - 1.0 / dim
    else:
        rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    sim = np.empty((dim + 1, dim))
    fs = np.empty(dim + 1)
    sim[0] = y0
    for k in range(dim):
        pt = y0.copy()
        pt[k] = (1.05 * pt[k]) if pt[k] != 0 else 0.00025
        sim[k + 1] = pt
    for k in range(dim + 1):
        fs[k] = objective(sim[k], kind, offsets, idx, owner, n, uidx, target, penalty)
    order = np.argsort(fs)
    sim, fs = sim[order], fs[order]
    for _ in range(maxiter):
        size = 0.0
        spread = 0.0
        for k in range(1, dim + 1):
            spread = max(spread, abs(fs[k] - fs[0]))
            for t in range(dim):
                size = max(size, abs(sim[k, t] - sim[0, t]))
        if size <= xatol and spread <= fatol:
            break
        xbar = np.zeros(dim)
        for k in range(dim):
            xbar += sim[k]
        xbar /= dim
        xr = (1 + rho) * xbar - rho * sim[-1]
        fr = objective(xr, kind, offsets, idx, owner, n, uidx, target, penalty)
        shrink = False
        if fr < fs[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
            fe = objective(xe, kind, offsets, idx, owner, n, uidx, target, penalty)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        elif fr < fs[-1]:
            xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
            fc = objective(xc, kind, offsets, idx, owner, n, uidx, target, penalty)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = (1 - psi) * xbar + psi * sim[-1]
            fcc = objective(xcc, kind, offsets, idx, owner, n, uidx, target, penalty)
            if fcc < fs[-1]:
                sim[-1], fs[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for k in range(1, dim + 1):
                sim[k] = sim[0] + sigma * (sim[k] - sim[0])
                fs[k] = objective(sim[k], kind, offsets, idx, owner, n, uidx, target, penalty)
        order = np.argsort(fs)
        sim, fs = sim[order], fs[order]
    return fs[0], sim[0].copy()

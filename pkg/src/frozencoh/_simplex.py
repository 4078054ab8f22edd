"""Compiled Nelder-Mead search over the probability simplex.

The incoherent state ``diag(p)`` is parameterised by logits: one reference
coordinate is pinned at logit 0 and the remaining ``d - 1`` logits are free,
so ``p = softmax(z)`` is always feasible. Objectives are selected by an
integer code because numba cannot pass Python callables cheaply.
"""
from __future__ import annotations

import numpy as np
from numba import njit

TRACE = 0
BURES = 1
RELATIVE_ENTROPY = 2


@njit(cache=True)
def _softmax(z, ref, p):
    d = p.shape[0]
    m = 0.0
    for i in range(d - 1):
        if z[i] > m:
            m = z[i]
    s = 0.0
    j = 0
    for i in range(d):
        if i == ref:
            p[i] = np.exp(-m)
        else:
            p[i] = np.exp(z[j] - m)
            j += 1
        s += p[i]
    for i in range(d):
        p[i] /= s


@njit(cache=True)
def distance_to_diag(kind, rho, aux, p):
    """D(rho, diag(p)). ``aux`` is a factor A with rho = A A^dag for Bures, and for relative entropy
    its [0, 0] entry carries -S(rho) with the real diagonal of rho in row 1."""
    d = p.shape[0]
    if kind == TRACE:
        a = rho.copy()
        for i in range(d):
            a[i, i] -= p[i]
        w = np.linalg.eigvalsh(a)
        return 0.5 * np.sum(np.abs(w))
    if kind == BURES:
        # rho = A A^dag with A of shape (d, rank). With W = X Y^dag from the SVD
        # A^dag diag(sqrt p) = X S Y^dag, D_B^2 = ||A W - diag(sqrt p)||_F^2:
        # a sum of squares, so small distances keep full relative precision
        r = aux.shape[1]
        sp = np.sqrt(p)
        c = np.empty((r, d), dtype=np.complex128)
        for a in range(r):
            for i in range(d):
                c[a, i] = np.conj(aux[i, a]) * sp[i]
        x, _, yh = np.linalg.svd(c, full_matrices=False)
        res = aux @ (x @ yh)
        v = 0.0
        for i in range(d):
            res[i, i] -= sp[i]
            for j in range(d):
                v += res[i, j].real ** 2 + res[i, j].imag ** 2
        return np.sqrt(v)
    # relative entropy S(rho || diag p) = -S(rho) - sum_i rho_ii log2 p_i
    v = aux[0, 0].real
    for i in range(d):
        r = aux[1, i].real
        if r > 0.0:
            if p[i] <= 0.0:
                return np.inf
            v -= r * np.log2(p[i])
    return v if v > 0.0 else 0.0


@njit(cache=True)
def batch_distance(kind, rho, aux, ps):
    """distance_to_diag for each row of ``ps``."""
    out = np.empty(ps.shape[0])
    for k in range(ps.shape[0]):
        out[k] = distance_to_diag(kind, rho, aux, ps[k])
    return out


@njit(cache=True)
def _objective(kind, rho, aux, z, ref, p):
    _softmax(z, ref, p)
    return distance_to_diag(kind, rho, aux, p)


@njit(cache=True)
def nelder_mead(kind, rho, aux, z0, ref, step, xatol, fatol, maxfev):
    """Adaptive Nelder-Mead (dimension-dependent coefficients)."""
    n = z0.shape[0]
    p = np.empty(n + 1)
    alpha = 1.0
    if n > 1:
        beta = 1.0 + 2.0 / n
        gamma = 0.75 - 0.5 / n
        shrink = 1.0 - 1.0 / n
    else:
        beta = 2.0
        gamma = 0.5
        shrink = 0.5
    simplex = np.empty((n + 1, n))
    fvals = np.empty(n + 1)
    for i in range(n + 1):
        simplex[i] = z0
        if i > 0:
            simplex[i, i - 1] += step
        fvals[i] = _objective(kind, rho, aux, simplex[i], ref, p)
    fev = n + 1
    size = np.inf
    while fev < maxfev:
        order = np.argsort(fvals)
        simplex = simplex[order]
        fvals = fvals[order]
        size = 0.0
        spread = 0.0
        for i in range(1, n + 1):
            spread = max(spread, abs(fvals[i] - fvals[0]))
            for j in range(n):
                size = max(size, abs(simplex[i, j] - simplex[0, j]))
        if size <= xatol or spread <= fatol:
            break
        centroid = np.zeros(n)
        for i in range(n):
            centroid += simplex[i]
        centroid /= n
        xr = centroid + alpha * (centroid - simplex[n])
        fr = _objective(kind, rho, aux, xr, ref, p)
        fev += 1
        if fr < fvals[0]:
            xe = centroid + beta * (xr - centroid)
            fe = _objective(kind, rho, aux, xe, ref, p)
            fev += 1
            if fe < fr:
                simplex[n] = xe
                fvals[n] = fe
            else:
                simplex[n] = xr
                fvals[n] = fr
        elif fr < fvals[n - 1]:
            simplex[n] = xr
            fvals[n] = fr
        else:
            if fr < fvals[n]:
                xc = centroid + gamma * (xr - centroid)
                fc = _objective(kind, rho, aux, xc, ref, p)
                fev += 1
                accept = fc <= fr
            else:
                xc = centroid - gamma * (centroid - simplex[n])
                fc = _objective(kind, rho, aux, xc, ref, p)
                fev += 1
                accept = fc < fvals[n]
            if accept:
                simplex[n] = xc
                fvals[n] = fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0])
                    fvals[i] = _objective(kind, rho, aux, simplex[i], ref, p)
                    fev += 1
    k = np.argmin(fvals)
    return simplex[k].copy(), fvals[k], fev, size


@njit(cache=True)
def local_search(kind, rho, aux, z0, ref, step, restart_step, xatol, fatol, value_tol, max_rounds, maxfev):
    """Repeated Nelder-Mead from the incumbent until a round gains < value_tol.

    The first round uses ``step`` for the initial simplex, later rounds the
    smaller ``restart_step``.

    Returns (logits, value, rounds, evaluations, final simplex size).
    """
    z = z0.copy()
    best = np.inf
    total = 0
    rounds = 0
    size = np.inf
    for _ in range(max_rounds):
        rounds += 1
        h = step if rounds == 1 else restart_step
        z_new, f, fev, size = nelder_mead(kind, rho, aux, z, ref, h, xatol, fatol, maxfev)
        total += fev
        gained = best - f
        if f < best:
            best = f
            z = z_new
        if gained < value_tol:
            break
    return z, best, rounds, total, size


def probabilities(z: np.ndarray, ref: int) -> np.ndarray:
    p = np.empty(z.shape[0] + 1)
    _softmax(z, ref, p)
    return p


def start_logits(p0: np.ndarray) -> tuple[np.ndarray, int]:
    """Logits for a start point; the largest entry becomes the pinned reference."""
    ref = int(np.argmax(p0))
    free = np.delete(p0, ref)
    z = np.log(np.clip(free, 1e-300, None) / p0[ref])
    return np.maximum(z, -690.0), ref

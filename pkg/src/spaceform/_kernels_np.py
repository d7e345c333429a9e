"""Vectorized numpy counterparts of :mod:`spaceform._kernels_nb`.

Same signatures and return conventions; used when numba is disabled and as an
independent cross-check in the tests.
"""
from __future__ import annotations

from math import gcd

import numpy as np


def mul(m, n, rpow, x, y):
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    i1, j1 = np.divmod(x, n)
    i2, j2 = np.divmod(y, n)
    return ((i1 + rpow[j1] * i2) % m) * n + (j1 + j2) % n


def inv(m, n, rpow, x):
    x = np.asarray(x, dtype=np.int64)
    i, j = np.divmod(x, n)
    jj = (n - j) % n
    return ((-rpow[jj] * i) % m) * n + jj


def conj(m, n, rpow, h, g):
    return mul(m, n, rpow, mul(m, n, rpow, h, g), inv(m, n, rpow, h))


def element_orders(m, n, rpow):
    N = m * n
    elems = np.arange(N, dtype=np.int64)
    orders = np.zeros(N, dtype=np.int64)
    power = elems.copy()
    k = 1
    while True:
        hit = (power == 0) & (orders == 0)
        orders[hit] = k
        if orders.all():
            return orders
        power = mul(m, n, rpow, power, elems)
        k += 1


def closure(m, n, rpow, gens):
    gens = np.asarray(gens, dtype=np.int64)
    mask = np.zeros(m * n, dtype=bool)
    mask[0] = True
    frontier = np.zeros(1, dtype=np.int64)
    while frontier.size:
        new = mul(m, n, rpow, frontier[:, None], gens[None, :]).ravel()
        new = np.unique(new[~mask[new]])
        mask[new] = True
        frontier = new
    return mask


def closure_size_capped(m, n, rpow, gens, cap):
    size = int(closure(m, n, rpow, gens).sum())
    return size if size <= cap else -1


def _cyclic_mask(m, n, rpow, g, d):
    mask = np.zeros(m * n, dtype=bool)
    mask[0] = True
    x = np.int64(0)
    for _ in range(d - 1):
        x = mul(m, n, rpow, x, g)
        mask[x] = True
    return mask


def index3_normal_cyclic(m, n, rpow, orders):
    N = m * n
    if N % 3:
        return -1
    d = N // 3
    a = (1 % m) * n
    b = 1 % n
    seen = np.zeros(N, dtype=bool)
    for g in np.flatnonzero(orders == d):
        if seen[g]:
            continue
        mask = _cyclic_mask(m, n, rpow, g, d)
        seen |= mask & (orders == d)
        if mask[conj(m, n, rpow, a, g)] and mask[conj(m, n, rpow, b, g)]:
            return int(g)
    return -1


def _subgroup_reps(m, n, rpow, orders, k):
    """One generator per cyclic subgroup of order k."""
    seen = np.zeros(m * n, dtype=bool)
    reps = []
    for x in np.flatnonzero(orders == k):
        if not seen[x]:
            reps.append(int(x))
            seen |= _cyclic_mask(m, n, rpow, x, k)
    return np.array(reps, dtype=np.int64)


def noncyclic_qp_witness(m, n, rpow, orders, primes, q):
    N = m * n
    if N % q:
        return -1, -1
    qs = _subgroup_reps(m, n, rpow, orders, q)
    if N % (q * q) == 0 and qs.size > 1:
        ab = mul(m, n, rpow, qs[:, None], qs[None, :])
        ba = mul(m, n, rpow, qs[None, :], qs[:, None])
        hits = np.argwhere(np.triu(ab == ba, k=1))
        if hits.size:
            s, t = hits[0]
            return int(qs[s]), int(qs[t])
    for p in primes:
        p = int(p)
        if p == q:
            continue
        for x in _subgroup_reps(m, n, rpow, orders, p):
            xy = mul(m, n, rpow, x, qs)
            yx = mul(m, n, rpow, qs, x)
            for y in qs[xy != yx]:
                if closure_size_capped(m, n, rpow, [x, y], q * p) == q * p:
                    return int(x), int(y)
    return -1, -1


def spherical_witness(m, n, rpow, orders, derived):
    N = m * n
    mm = int(derived.sum())
    nn = N // mm
    if gcd(mm, nn) != 1 or nn % 9:
        return -1, -1, -1
    gens = np.flatnonzero(derived & (orders == mm))
    if gens.size == 0:
        return -1, -1, -1
    a = int(gens[0])
    pos = np.full(N, -1, dtype=np.int64)
    x = np.int64(0)
    for t in range(mm):
        pos[x] = t
        x = mul(m, n, rpow, x, a)
    bs = np.flatnonzero(orders == nn)
    rs = pos[conj(m, n, rpow, bs, a)]
    for r in rs:
        r = int(r)
        if r >= 0 and gcd(nn * (r - 1), mm) == 1 and (r * r + r + 1) % mm == 0:
            return mm, nn, r
    return -1, -1, -1


# ---------------------------------------------------------------- lens spaces


def lens_cos(x, y, ck, sk, cl, sl):
    """Broadcasting version: x, y of shape (..., 4)."""
    x = np.asarray(x)
    y = np.asarray(y)
    ur = x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1]
    ui = x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]
    vr = x[..., 2] * y[..., 2] + x[..., 3] * y[..., 3]
    vi = x[..., 2] * y[..., 3] - x[..., 3] * y[..., 2]
    c = (ur[..., None] * ck - ui[..., None] * sk
         + vr[..., None] * cl - vi[..., None] * sl)
    return c.max(axis=-1)


def lens_dist(x, y, ck, sk, cl, sl):
    return np.arccos(np.clip(lens_cos(x, y, ck, sk, cl, sl), -1.0, 1.0))


def pair_distances(P, ck, sk, cl, sl):
    D = lens_dist(P[:, None, :], P[None, :, :], ck, sk, cl, sl)
    np.fill_diagonal(D, 0.0)
    return D


def _tangent_basis(x):
    a, b, c, d = x
    return np.array([[-b, a, -d, c], [-c, d, a, -b], [-d, -c, b, a]])


def extent_ascent(P, ck, sk, cl, sl, which, noise, steps, polish):
    q = P.shape[0]
    D = pair_distances(P, ck, sk, cl, sl)
    others = np.ones(q, dtype=bool)
    accepted = 0

    def try_move(i, cand):
        nonlocal accepted
        cand = cand / np.linalg.norm(cand)
        others[:] = True
        others[i] = False
        row = lens_dist(cand[None, :], P[others], ck, sk, cl, sl)
        if (row - D[i, others]).sum() > 0.0:
            P[i] = cand
            D[i, others] = row
            D[others, i] = row
            accepted += 1

    for it in range(which.shape[0]):
        i = int(which[it])
        x = P[i]
        t = noise[it] - np.dot(noise[it], x) * x
        try_move(i, x + steps[it] * t)
    for h in polish:
        for i in range(q):
            basis = _tangent_basis(P[i].copy())
            for e in range(3):
                for sign in (1.0, -1.0):
                    try_move(i, P[i] + sign * h * basis[e])
    return accepted


# ------------------------------------------------------------------- S⁵ reps


def max_quadratic(S, x):
    return float(np.einsum("a,kab,b->k", x, S, x).max())


def maximin_ascent(S, x, noise, step0, min_step):
    cur = max_quadratic(S, x)
    step = step0
    for it in range(noise.shape[0]):
        t = noise[it] - np.dot(noise[it], x) * x
        cand = x + step * t
        cand /= np.linalg.norm(cand)
        val = max_quadratic(S, cand)
        if val < cur:
            cur = val
            x[:] = cand
            step = min(step * 1.5, 0.5)
        else:
            step = max(step * 0.93, min_step)
    return cur

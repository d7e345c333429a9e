"""Loop kernels compiled with numba.

Group elements of Γ(m, n, r) are addressed by the flat index ``i * n + j`` of
the normal form A^i B^j; ``rpow[j] = r**j mod m``.  Sphere points are float64
rows (S³ as 4 reals, S⁵ as 6 reals).
"""
from __future__ import annotations

import numpy as np

from ._jit import njit


@njit
def gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit
def mul(m, n, rpow, x, y):
    i1 = x // n
    j1 = x % n
    i2 = y // n
    j2 = y % n
    return ((i1 + rpow[j1] * i2) % m) * n + (j1 + j2) % n


@njit
def inv(m, n, rpow, x):
    i = x // n
    j = x % n
    jj = (n - j) % n
    return ((-rpow[jj] * i) % m) * n + jj


@njit
def conj(m, n, rpow, h, g):
    return mul(m, n, rpow, mul(m, n, rpow, h, g), inv(m, n, rpow, h))


@njit
def element_orders(m, n, rpow):
    N = m * n
    orders = np.empty(N, dtype=np.int64)
    for j in range(n):
        t = n // gcd(j, n)
        # (i, j)^t = (i * (1 + r^j + ... + r^{(t-1)j}), 0)
        acc = 0
        p = 1 % m
        rj = rpow[j]
        for _ in range(t):
            acc = (acc + p) % m
            p = (p * rj) % m
        for i in range(m):
            x = (i * acc) % m
            orders[i * n + j] = t * (m // gcd(x, m))
    return orders


@njit
def closure(m, n, rpow, gens):
    N = m * n
    mask = np.zeros(N, dtype=np.bool_)
    queue = np.empty(N, dtype=np.int64)
    mask[0] = True
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for g in gens:
            y = mul(m, n, rpow, x, g)
            if not mask[y]:
                mask[y] = True
                queue[tail] = y
                tail += 1
    return mask


@njit
def closure_size_capped(m, n, rpow, gens, cap):
    """Order of <gens>, or -1 as soon as it exceeds ``cap``."""
    N = m * n
    mask = np.zeros(N, dtype=np.bool_)
    queue = np.empty(N, dtype=np.int64)
    mask[0] = True
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for g in gens:
            y = mul(m, n, rpow, x, g)
            if not mask[y]:
                if tail == cap:
                    return -1
                mask[y] = True
                queue[tail] = y
                tail += 1
    return tail


@njit
def index3_normal_cyclic(m, n, rpow, orders):
    """Generator of a normal cyclic subgroup of index 3, or -1."""
    N = m * n
    if N % 3 != 0:
        return -1
    d = N // 3
    a = (1 % m) * n
    b = 1 % n
    seen = np.zeros(N, dtype=np.bool_)
    mask = np.zeros(N, dtype=np.bool_)
    for g in range(N):
        if orders[g] != d or seen[g]:
            continue
        mask[:] = False
        x = 0
        for _ in range(d):
            mask[x] = True
            if orders[x] == d:
                seen[x] = True
            x = mul(m, n, rpow, x, g)
        if mask[conj(m, n, rpow, a, g)] and mask[conj(m, n, rpow, b, g)]:
            return g
    return -1


@njit
def noncyclic_qp_witness(m, n, rpow, orders, primes, q):
    """Generators (x, y) of a noncyclic subgroup of order q*p (p prime), or (-1, -1).

    Such a subgroup is generated by an element of order p and one of order q;
    for p != q it is noncyclic iff they do not commute, for p == q iff they
    commute and generate different subgroups.
    """
    N = m * n
    if N % q != 0:
        return -1, -1
    seen = np.zeros(N, dtype=np.bool_)
    qcount = 0
    qs = np.empty(N, dtype=np.int64)
    for y in range(N):
        if orders[y] != q or seen[y]:
            continue
        qs[qcount] = y
        qcount += 1
        z = y
        for _ in range(q - 1):
            seen[z] = True
            z = mul(m, n, rpow, z, y)
    if N % (q * q) == 0:
        for s in range(qcount):
            a = qs[s]
            for t in range(s + 1, qcount):
                b = qs[t]
                if mul(m, n, rpow, a, b) == mul(m, n, rpow, b, a):
                    return a, b
    gens = np.empty(2, dtype=np.int64)
    for p in primes:
        if p == q:
            continue
        seen[:] = False
        for x in range(N):
            if orders[x] != p or seen[x]:
                continue
            z = x
            for _ in range(p - 1):
                seen[z] = True
                z = mul(m, n, rpow, z, x)
            for s in range(qcount):
                y = qs[s]
                if mul(m, n, rpow, x, y) == mul(m, n, rpow, y, x):
                    continue
                gens[0] = x
                gens[1] = y
                if closure_size_capped(m, n, rpow, gens, q * p) == q * p:
                    return x, y
    return -1, -1


@njit
def spherical_witness(m, n, rpow, orders, derived):
    """(m', n', r') of a Wolf-normalized presentation with ⟨a⟩ = G', or (-1, -1, -1).

    Any presentation with gcd(r' - 1, m') = 1 has commutator subgroup ⟨a⟩, so
    fixing ``a`` as a generator of G' and scanning every ``b`` is exhaustive.
    """
    N = m * n
    mm = 0
    for x in range(N):
        if derived[x]:
            mm += 1
    nn = N // mm
    if gcd(mm, nn) != 1 or nn % 9 != 0:
        return -1, -1, -1
    a = -1
    for x in range(N):
        if derived[x] and orders[x] == mm:
            a = x
            break
    if a < 0:
        return -1, -1, -1
    pos = np.full(N, -1, dtype=np.int64)
    x = 0
    for t in range(mm):
        pos[x] = t
        x = mul(m, n, rpow, x, a)
    for b in range(N):
        if orders[b] != nn:
            continue
        r = pos[conj(m, n, rpow, b, a)]
        if r < 0:
            continue
        if gcd(nn * (r - 1), mm) == 1 and (r * r + r + 1) % mm == 0:
            return mm, nn, r
    return -1, -1, -1


# ---------------------------------------------------------------- lens spaces


@njit
def lens_cos(x, y, ck, sk, cl, sl):
    """max over deck elements g of Re<x, g y> for points of S³ in R⁴."""
    ur = x[0] * y[0] + x[1] * y[1]
    ui = x[0] * y[1] - x[1] * y[0]
    vr = x[2] * y[2] + x[3] * y[3]
    vi = x[2] * y[3] - x[3] * y[2]
    best = -2.0
    for j in range(ck.shape[0]):
        c = ur * ck[j] - ui * sk[j] + vr * cl[j] - vi * sl[j]
        if c > best:
            best = c
    return best


@njit
def _acos(c):
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return np.arccos(c)


@njit
def lens_dist(x, y, ck, sk, cl, sl):
    return _acos(lens_cos(x, y, ck, sk, cl, sl))


@njit
def pair_distances(P, ck, sk, cl, sl):
    q = P.shape[0]
    D = np.zeros((q, q))
    for i in range(q):
        for j in range(i + 1, q):
            d = lens_dist(P[i], P[j], ck, sk, cl, sl)
            D[i, j] = d
            D[j, i] = d
    return D


@njit
def _unit(v):
    s = 0.0
    for t in range(v.shape[0]):
        s += v[t] * v[t]
    s = np.sqrt(s)
    for t in range(v.shape[0]):
        v[t] /= s


@njit
def _row_gain(P, D, i, cand, ck, sk, cl, sl, out):
    gain = 0.0
    for j in range(P.shape[0]):
        if j == i:
            out[j] = 0.0
            continue
        d = lens_dist(cand, P[j], ck, sk, cl, sl)
        out[j] = d
        gain += d - D[i, j]
    return gain


@njit
def extent_ascent(P, ck, sk, cl, sl, which, noise, steps, polish):
    """Greedy tangential ascent on the pairwise lens-distance sum.

    ``P`` (q×4) is updated in place.  Returns the number of accepted moves.
    """
    q = P.shape[0]
    D = pair_distances(P, ck, sk, cl, sl)
    cand = np.empty(4)
    row = np.empty(q)
    accepted = 0
    for it in range(which.shape[0]):
        i = which[it]
        x = P[i]
        dot = 0.0
        for t in range(4):
            dot += noise[it, t] * x[t]
        for t in range(4):
            cand[t] = x[t] + steps[it] * (noise[it, t] - dot * x[t])
        _unit(cand)
        if _row_gain(P, D, i, cand, ck, sk, cl, sl, row) > 0.0:
            P[i, :] = cand
            for j in range(q):
                D[i, j] = row[j]
                D[j, i] = row[j]
            accepted += 1
    basis = np.empty((3, 4))
    for h in polish:
        for i in range(q):
            a, b, c, d = P[i, 0], P[i, 1], P[i, 2], P[i, 3]
            basis[0, 0], basis[0, 1], basis[0, 2], basis[0, 3] = -b, a, -d, c
            basis[1, 0], basis[1, 1], basis[1, 2], basis[1, 3] = -c, d, a, -b
            basis[2, 0], basis[2, 1], basis[2, 2], basis[2, 3] = -d, -c, b, a
            for e in range(3):
                for sign in (1.0, -1.0):
                    for t in range(4):
                        cand[t] = P[i, t] + sign * h * basis[e, t]
                    _unit(cand)
                    if _row_gain(P, D, i, cand, ck, sk, cl, sl, row) > 0.0:
                        P[i, :] = cand
                        for j in range(q):
                            D[i, j] = row[j]
                            D[j, i] = row[j]
                        accepted += 1
    return accepted


# ------------------------------------------------------------------- S⁵ reps


@njit
def max_quadratic(S, x):
    """max over k of x·S[k]·x."""
    best = -2.0
    dim = x.shape[0]
    for k in range(S.shape[0]):
        acc = 0.0
        for a in range(dim):
            row = 0.0
            for b in range(dim):
                row += S[k, a, b] * x[b]
            acc += x[a] * row
        if acc > best:
            best = acc
    return best


@njit
def maximin_ascent(S, x, noise, step0, min_step):
    """Minimize max_k x·S[k]·x over the unit sphere by adaptive random search.

    ``x`` is updated in place; returns the final value.
    """
    dim = x.shape[0]
    cur = max_quadratic(S, x)
    step = step0
    cand = np.empty(dim)
    for it in range(noise.shape[0]):
        dot = 0.0
        for t in range(dim):
            dot += noise[it, t] * x[t]
        for t in range(dim):
            cand[t] = x[t] + step * (noise[it, t] - dot * x[t])
        _unit(cand)
        val = max_quadratic(S, cand)
        if val < cur:
            cur = val
            x[:] = cand
            step = min(step * 1.5, 0.5)
        else:
            step = max(step * 0.93, min_step)
    return cur

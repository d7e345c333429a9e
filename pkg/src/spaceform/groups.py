"""Exact engine for metacyclic groups Γ(m, n, r) = <A, B | A^m = B^n = 1, BAB⁻¹ = A^r>.

Elements are kept in the normal form A^i B^j and addressed internally by the
flat index ``i * n + j``; the identity is index 0.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .smith import abelian_invariants

DEFAULT_ORDER_CAP = 10_000


class PresentationError(ValueError):
    """Parameters do not define a metacyclic group."""


class OrderCapError(ValueError):
    """Group too large for exhaustive enumeration."""


class AutomorphismError(ValueError):
    """Power map does not extend to an automorphism."""


def prime_factors(N: int) -> list[int]:
    out = []
    p = 2
    while p * p <= N:
        if N % p == 0:
            out.append(p)
            while N % p == 0:
                N //= p
        p += 1
    if N > 1:
        out.append(N)
    return out


@dataclass(frozen=True, order=True)
class GroupElement:
    i: int
    j: int

    def __str__(self) -> str:
        return f"A^{self.i} B^{self.j}"


@dataclass(frozen=True)
class MetacyclicPresentation:
    m: int
    n: int
    r: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise PresentationError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if not 0 <= self.r < self.m:
            raise PresentationError(f"r must satisfy 0 <= r < m, got r={self.r}, m={self.m}")

    @property
    def order(self) -> int:
        return self.m * self.n

    @property
    def consistent(self) -> bool:
        return pow(self.r, self.n, self.m) == 1 % self.m

    @property
    def burnside_normalized(self) -> bool:
        return gcd((self.r - 1) * self.n, self.m) == 1

    @cached_property
    def rpow(self) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        p = 1 % self.m
        for j in range(self.n):
            out[j] = p
            p = p * self.r % self.m
        return out

    @property
    def _k(self) -> tuple:
        return self.m, self.n, self.rpow

    # -- elements

    def index(self, g: GroupElement) -> int:
        return (g.i % self.m) * self.n + g.j % self.n

    def element(self, idx: int) -> GroupElement:
        i, j = divmod(int(idx), self.n)
        return GroupElement(i, j)

    def elements(self) -> Iterator[GroupElement]:
        for idx in range(self.order):
            yield self.element(idx)

    @property
    def A(self) -> GroupElement:
        return GroupElement(1 % self.m, 0)

    @property
    def B(self) -> GroupElement:
        return GroupElement(0, 1 % self.n)

    @property
    def identity(self) -> GroupElement:
        return GroupElement(0, 0)

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return GroupElement((a.i + int(self.rpow[a.j % self.n]) * b.i) % self.m,
                            (a.j + b.j) % self.n)

    def inv(self, a: GroupElement) -> GroupElement:
        return self.element(kernels.inv(*self._k, self.index(a)))

    def power(self, a: GroupElement, k: int) -> GroupElement:
        if k < 0:
            a, k = self.inv(a), -k
        out = self.identity
        base = a
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    # -- cached structure

    @cached_property
    def orders(self) -> np.ndarray:
        return kernels.element_orders(*self._k)

    @cached_property
    def is_cyclic(self) -> bool:
        return bool((self.orders == self.order).any())

    @cached_property
    def primes(self) -> np.ndarray:
        return np.array(prime_factors(self.order), dtype=np.int64)

    def closure_mask(self, gens: Iterable[int]) -> np.ndarray:
        return kernels.closure(*self._k, np.asarray(list(gens), dtype=np.int64))

    def commutes(self, x: int, y: int) -> bool:
        return int(kernels.mul(*self._k, x, y)) == int(kernels.mul(*self._k, y, x))

    def __str__(self) -> str:
        return f"Γ({self.m},{self.n},{self.r})"


def validate_presentation(m: int, n: int, r: int) -> MetacyclicPresentation:
    G = MetacyclicPresentation(m, n, r)
    if not G.consistent:
        raise PresentationError(
            f"inconsistent relation: r^n = {r}^{n} ≡ {pow(r, n, m)} ≢ 1 (mod {m})")
    return G


def _require(G: MetacyclicPresentation) -> None:
    if not G.consistent:
        raise PresentationError(f"{G} is inconsistent (r^n ≢ 1 mod m)")


@dataclass(frozen=True)
class Subgroup:
    generators: tuple[GroupElement, ...]
    elements: tuple[GroupElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in set(self.elements)

    @classmethod
    def from_mask(cls, G: MetacyclicPresentation, gens: Iterable[int], mask: np.ndarray) -> "Subgroup":
        return cls(tuple(G.element(g) for g in gens),
                   tuple(G.element(x) for x in np.flatnonzero(mask)))

    def mask(self, G: MetacyclicPresentation) -> np.ndarray:
        out = np.zeros(G.order, dtype=bool)
        out[[G.index(g) for g in self.elements]] = True
        return out


# ------------------------------------------------------------- enumeration


def _cyclic_subgroups(G: MetacyclicPresentation) -> list[tuple[int, np.ndarray]]:
    """(generator, mask) for every cyclic subgroup, in order of first generator."""
    seen: dict[bytes, int] = {}
    out = []
    for g in range(G.order):
        mask = G.closure_mask([g])
        key = np.packbits(mask).tobytes()
        if key not in seen:
            seen[key] = g
            out.append((g, mask))
    return out


def _check_cap(G: MetacyclicPresentation, cap: int) -> None:
    if G.order > cap:
        raise OrderCapError(f"|{G}| = {G.order} exceeds enumeration cap {cap}")


def enumerate_subgroups(G: MetacyclicPresentation, cap: int = DEFAULT_ORDER_CAP) -> list[Subgroup]:
    """All subgroups, each generated by at most two elements.

    Joins are taken over pairs of cyclic subgroups, which closes the same
    generator pairs as all element pairs.
    """
    _require(G)
    _check_cap(G, cap)
    cyc = _cyclic_subgroups(G)
    found: dict[bytes, tuple[tuple[int, ...], np.ndarray]] = {}
    for g, mask in cyc:
        found[np.packbits(mask).tobytes()] = ((g,) if g else (), mask)
    for s, (g1, m1) in enumerate(cyc):
        for g2, m2 in cyc[s + 1:]:
            if (m2 <= m1).all() or (m1 <= m2).all():
                continue
            mask = G.closure_mask([g1, g2])
            key = np.packbits(mask).tobytes()
            if key not in found:
                found[key] = ((g1, g2), mask)
    subs = [Subgroup.from_mask(G, gens, mask) for gens, mask in found.values()]
    subs.sort(key=lambda H: (H.order, H.elements))
    return subs


def enumerate_subgroups_bruteforce(G: MetacyclicPresentation, arity: int = 2) -> list[tuple[GroupElement, ...]]:
    """Element sets of <x_1..x_arity> over all element tuples; test oracle, small groups only."""
    from itertools import combinations_with_replacement

    found = set()
    for gens in combinations_with_replacement(range(G.order), arity):
        mask = G.closure_mask(gens)
        found.add(tuple(G.element(x) for x in np.flatnonzero(mask)))
    return sorted(found, key=lambda s: (len(s), s))


def is_cyclic_subgroup(G: MetacyclicPresentation, H: Subgroup) -> bool:
    return any(G.orders[G.index(g)] == H.order for g in H.elements)


def is_abelian_subgroup(G: MetacyclicPresentation, H: Subgroup) -> bool:
    gens = [G.index(g) for g in H.generators]
    return all(G.commutes(a, b) for a in gens for b in gens)


def centralizer_mask(G: MetacyclicPresentation, gens: Iterable[int]) -> np.ndarray:
    elems = np.arange(G.order, dtype=np.int64)
    mask = np.ones(G.order, dtype=bool)
    for g in gens:
        mask &= kernels.mul(*G._k, elems, g) == kernels.mul(*G._k, g, elems)
    return mask


def is_normal_mask(G: MetacyclicPresentation, mask: np.ndarray) -> bool:
    elems = np.flatnonzero(mask)
    for h in (G.index(G.A), G.index(G.B)):
        if not mask[kernels.conj(*G._k, h, elems)].all():
            return False
    return True


# ------------------------------------------------------ center / semicenter


@dataclass(frozen=True)
class CenterReport:
    center: Subgroup
    semicenters: tuple[Subgroup, ...]


def center_mask(G: MetacyclicPresentation) -> np.ndarray:
    return centralizer_mask(G, [G.index(G.A), G.index(G.B)])


def center_and_semicenter(G: MetacyclicPresentation, cap: int = DEFAULT_ORDER_CAP) -> CenterReport:
    _require(G)
    zmask = center_mask(G)
    zgens = [int(x) for x in np.flatnonzero(zmask & (G.orders == zmask.sum()))][:1]
    if not zgens:  # center need not be cyclic in general
        zgens = [int(x) for x in np.flatnonzero(zmask)]
    center = Subgroup.from_mask(G, zgens, zmask)
    best: list[Subgroup] = []
    for H in enumerate_subgroups(G, cap):
        if not is_abelian_subgroup(G, H):
            continue
        cmask = centralizer_mask(G, [G.index(g) for g in H.generators])
        if 2 * cmask.sum() < G.order:
            continue
        if not best or H.order > best[0].order:
            best = [H]
        elif H.order == best[0].order:
            best.append(H)
    return CenterReport(center, tuple(best))


# ------------------------------------------------------------ predicates


def _qp_witness(G: MetacyclicPresentation, q: int) -> tuple[int, int]:
    x, y = kernels.noncyclic_qp_witness(*G._k, G.orders, G.primes, q)
    return int(x), int(y)


def _condition_qp_enumerated(G: MetacyclicPresentation, q: int, cap: int) -> bool:
    primes = set(prime_factors(G.order))
    for H in enumerate_subgroups(G, cap):
        if H.order % q == 0 and H.order // q in primes and not is_cyclic_subgroup(G, H):
            return False
    return True


def condition_3p(G: MetacyclicPresentation, method: str = "kernel", cap: int = DEFAULT_ORDER_CAP) -> bool:
    """Every subgroup of order 3p (p prime, p = 3 included) is cyclic."""
    _require(G)
    if G.is_cyclic:
        return True
    if method == "enumerate":
        return _condition_qp_enumerated(G, 3, cap)
    return _qp_witness(G, 3) == (-1, -1)


@dataclass(frozen=True)
class NormalCyclic:
    subgroup: Subgroup
    index: int
    is_maximal: bool


def normal_cyclic_subgroups(G: MetacyclicPresentation, cap: int = DEFAULT_ORDER_CAP) -> list[NormalCyclic]:
    _require(G)
    _check_cap(G, cap)
    cyc = _cyclic_subgroups(G)
    out = []
    for g, mask in cyc:
        if not is_normal_mask(G, mask):
            continue
        size = int(mask.sum())
        maximal = not any(int(m2.sum()) > size and (mask <= m2).all() for _, m2 in cyc)
        out.append(NormalCyclic(Subgroup.from_mask(G, [g], mask), G.order // size, maximal))
    out.sort(key=lambda t: (t.index, t.subgroup.elements))
    return out


def has_index3_normal_cyclic(G: MetacyclicPresentation) -> bool:
    _require(G)
    return kernels.index3_normal_cyclic(*G._k, G.orders) >= 0


@dataclass(frozen=True)
class PQConditions:
    cond_2p: bool
    sylow_cyclic: bool


def sylow_cyclic(G: MetacyclicPresentation) -> bool:
    """A Sylow p-subgroup of order p^a is cyclic iff some element has order p^a."""
    N = G.order
    for p in prime_factors(N):
        pa = 1
        while N % (pa * p) == 0:
            pa *= p
        if not (G.orders == pa).any():
            return False
    return True


def pq_conditions(G: MetacyclicPresentation) -> PQConditions:
    _require(G)
    if G.is_cyclic:
        return PQConditions(True, True)
    return PQConditions(_qp_witness(G, 2) == (-1, -1), sylow_cyclic(G))


# --------------------------------------------------------------- spherical


def commutator_subgroup_mask(G: MetacyclicPresentation) -> np.ndarray:
    """Normal closure of [A, B]."""
    a, b = G.index(G.A), G.index(G.B)
    k = G._k
    c = kernels.mul(*k, kernels.mul(*k, a, b), kernels.mul(*k, kernels.inv(*k, a), kernels.inv(*k, b)))
    conjugates = np.unique(kernels.conj(*k, np.arange(G.order, dtype=np.int64), c))
    return G.closure_mask(conjugates)


@dataclass(frozen=True)
class SphericalVerdict:
    verdict: bool
    cyclic: bool
    witness: tuple[int, int, int] | None = None


def is_spherical_5_space_group(G: MetacyclicPresentation) -> SphericalVerdict:
    """Cyclic, or isomorphic to Γ(m', n', r') with 9 | n', gcd(n'(r'-1), m') = 1, r'^2+r'+1 ≡ 0 (m')."""
    _require(G)
    if G.is_cyclic:
        return SphericalVerdict(True, True)
    mm, nn, rr = kernels.spherical_witness(*G._k, G.orders, commutator_subgroup_mask(G))
    if mm < 0:
        return SphericalVerdict(False, False)
    return SphericalVerdict(True, False, (int(mm), int(nn), int(rr)))


def spherical_witness_bruteforce(G: MetacyclicPresentation) -> tuple[int, int, int] | None:
    """Search all pairs (a, b) for a Wolf-normalized presentation; test oracle."""
    N = G.order
    orders = G.orders
    for a in range(N):
        ma = int(orders[a])
        if N % ma or gcd(ma, N // ma) != 1:
            continue
        amask = G.closure_mask([a])
        if not is_normal_mask(G, amask):
            continue
        pos = {}
        x = 0
        for t in range(ma):
            pos[x] = t
            x = int(kernels.mul(*G._k, x, a))
        nb = N // ma
        if nb % 9:
            continue
        for b in np.flatnonzero(orders == nb):
            r = pos[int(kernels.conj(*G._k, int(b), a))]
            if gcd(nb * (r - 1), ma) == 1 and (r * r + r + 1) % ma == 0:
                return ma, nb, r
    return None


# --------------------------------------------------------- abelianization


def abelianization(G: MetacyclicPresentation) -> tuple[int, ...]:
    """Invariant factors of G/[G, G], from the brute-force commutator subgroup."""
    _require(G)
    rels = [[G.m, 0], [0, G.n]]
    for x in np.flatnonzero(commutator_subgroup_mask(G)):
        g = G.element(x)
        rels.append([g.i, g.j])
    return abelian_invariants(rels, 2)


# ----------------------------------------------------------- automorphisms


@dataclass(frozen=True)
class Automorphism:
    t: int
    u: int
    images: tuple[int, ...] = field(repr=False)

    @property
    def order(self) -> int:
        perm = np.array(self.images)
        cur = perm.copy()
        k = 1
        while not (cur == np.arange(len(perm))).all():
            cur = perm[cur]
            k += 1
        return k

    def __call__(self, G: MetacyclicPresentation, g: GroupElement) -> GroupElement:
        return G.element(self.images[G.index(g)])


def power_automorphism(G: MetacyclicPresentation, t: int, u: int) -> Automorphism:
    """The map A -> A^t, B -> B^u, if it extends to an automorphism."""
    _require(G)
    a = G.power(G.A, t)
    b = G.power(G.B, u)
    lhs = G.mul(G.mul(b, a), G.inv(b))
    rhs = G.power(a, G.r)
    if lhs != rhs:
        raise AutomorphismError(
            f"relation BAB⁻¹ = A^r violated by A -> A^{t}, B -> B^{u}: "
            f"{lhs} != {rhs}")
    images = [G.index(G.mul(G.power(a, g.i), G.power(b, g.j))) for g in G.elements()]
    if len(set(images)) != G.order:
        raise AutomorphismError(f"A -> A^{t}, B -> B^{u} is not bijective")
    return Automorphism(t, u, tuple(images))


# -------------------------------------------------------------- isomorphism


def _invariants(G: MetacyclicPresentation) -> tuple:
    return G.order, tuple(np.bincount(G.orders).tolist())


def find_presentation_images(H: MetacyclicPresentation, G: MetacyclicPresentation) -> tuple[int, int] | None:
    """Images (a, b) in G of the generators of H defining an isomorphism H -> G.

    A -> a, B -> b extends to a homomorphism iff a^m = b^n = 1 and
    b a b⁻¹ = a^r; it is then an isomorphism iff <a, b> = G and |H| = |G|.
    """
    if H.order != G.order:
        return None
    orders = G.orders
    bs = np.flatnonzero(H.n % orders == 0)
    for a in np.flatnonzero(H.m % orders == 0):
        a = int(a)
        target = G.index(G.power(G.element(a), H.r))
        hits = bs[kernels.conj(*G._k, bs, a) == target]
        for b in hits:
            if G.closure_mask([a, int(b)]).all():
                return a, int(b)
    return None


def are_isomorphic(G: MetacyclicPresentation, H: MetacyclicPresentation) -> bool:
    if _invariants(G) != _invariants(H):
        return False
    return find_presentation_images(H, G) is not None


# ----------------------------------------------------------------- harness


def consistent_presentations(order_cap: int) -> Iterator[MetacyclicPresentation]:
    for m in range(1, order_cap + 1):
        for n in range(1, order_cap // m + 1):
            for r in range(m):
                if pow(r, n, m) == 1 % m:
                    yield MetacyclicPresentation(m, n, r)


@dataclass
class HarnessReport:
    order_cap: int
    presentations: int = 0
    noncyclic: int = 0
    hypotheses_met: int = 0
    passed: int = 0
    instances: list[tuple[int, int, int]] = field(default_factory=list)
    witnesses: list[tuple[int, int, int]] = field(default_factory=list)
    counterexamples: list[dict] = field(default_factory=list)
    isomorphism_classes: list[list[tuple[int, int, int]]] | None = None

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "order_cap": self.order_cap,
            "presentations": self.presentations,
            "noncyclic": self.noncyclic,
            "hypotheses_met": self.hypotheses_met,
            "passed": self.passed,
            "instances": [list(t) for t in self.instances],
            "witnesses": [list(t) for t in self.witnesses],
            "counterexamples": self.counterexamples,
            "isomorphism_classes": None if self.isomorphism_classes is None
            else [[list(t) for t in c] for c in self.isomorphism_classes],
            "ok": self.ok,
        }


def _harness_one(G: MetacyclicPresentation) -> tuple[str, tuple | None, dict | None]:
    if G.is_cyclic:
        return "cyclic", None, None
    if G.order % 3 or not has_index3_normal_cyclic(G) or not condition_3p(G):
        return "noncyclic", None, None
    v = is_spherical_5_space_group(G)
    if v.verdict and v.witness is not None and v.witness[1] % 9 == 0:
        return "pass", v.witness, None
    return "fail", None, {"m": G.m, "n": G.n, "r": G.r, "spherical": v.verdict,
                          "witness": None if v.witness is None else list(v.witness)}


def _harness_shard(ms: list[int], order_cap: int) -> list[tuple]:
    out = []
    for m in ms:
        for n in range(1, order_cap // m + 1):
            for r in range(m):
                if pow(r, n, m) == 1 % m:
                    G = MetacyclicPresentation(m, n, r)
                    out.append(((m, n, r),) + _harness_one(G))
    return out


def spherical_criterion_harness(order_cap: int, dedupe: bool = True, workers: int = 1) -> HarnessReport:
    """Check [noncyclic, 3p-subgroups cyclic, index-3 normal cyclic] => spherical, 9 | n.

    Runs over every consistent presentation of order <= ``order_cap``.
    """
    if order_cap > DEFAULT_ORDER_CAP:
        raise OrderCapError(f"order_cap {order_cap} exceeds {DEFAULT_ORDER_CAP}")
    ms = list(range(1, order_cap + 1))
    if workers > 1:
        shards = [ms[w::workers] for w in range(workers)]
        with ThreadPoolExecutor(workers) as pool:
            rows = [row for part in pool.map(_harness_shard, shards, [order_cap] * workers) for row in part]
    else:
        rows = _harness_shard(ms, order_cap)
    rows.sort(key=lambda row: row[0])
    rep = HarnessReport(order_cap)
    for params, status, witness, failure in rows:
        rep.presentations += 1
        if status == "cyclic":
            continue
        rep.noncyclic += 1
        if status == "noncyclic":
            continue
        rep.hypotheses_met += 1
        rep.instances.append(params)
        if status == "pass":
            rep.passed += 1
            rep.witnesses.append(witness)
        else:
            rep.counterexamples.append(failure)
    if dedupe:
        classes: list[list[tuple[int, int, int]]] = []
        reps: list[MetacyclicPresentation] = []
        for params in rep.instances:
            G = MetacyclicPresentation(*params)
            for c, R in zip(classes, reps):
                if are_isomorphic(R, G):
                    c.append(params)
                    break
            else:
                classes.append([params])
                reps.append(G)
        rep.isomorphism_classes = classes
    return rep


# -------------------------------------------------------------- reporting


def group_report(G: MetacyclicPresentation, cap: int = DEFAULT_ORDER_CAP) -> dict:
    _require(G)
    sph = is_spherical_5_space_group(G)
    cs = center_and_semicenter(G, cap)
    pq = pq_conditions(G)
    return {
        "m": G.m,
        "n": G.n,
        "r": G.r,
        "order": G.order,
        "cyclic": G.is_cyclic,
        "spherical": {"verdict": sph.verdict,
                      "witness": None if sph.witness is None else list(sph.witness)},
        "center": {"order": cs.center.order, "index": G.order // cs.center.order},
        "semicenters": [
            {"order": H.order, "generators": [[g.i, g.j] for g in H.generators]}
            for H in cs.semicenters
        ],
        "predicates": {
            "c3p": condition_3p(G),
            "c2p": pq.cond_2p,
            "sylow_cyclic": pq.sylow_cyclic,
            "index3_normal_cyclic": has_index3_normal_cyclic(G),
        },
        "abelianization": list(abelianization(G)),
    }


def spherical_catalog(max_order: int) -> list[dict]:
    out = []
    for G in consistent_presentations(max_order):
        v = is_spherical_5_space_group(G)
        out.append({"m": G.m, "n": G.n, "r": G.r, "order": G.order, "cyclic": v.cyclic,
                    "spherical": v.verdict,
                    "witness": None if v.witness is None else list(v.witness)})
    return out

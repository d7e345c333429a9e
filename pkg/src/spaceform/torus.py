"""Linear T^k actions on S⁵ ⊂ C³ given by integer weight matrices.

Column j of W is the weight of coordinate z_j: θ·z_j = e^{2πi<w_j, θ>} z_j.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .smith import smith_normal_form, transpose

SUPPORTS: tuple[tuple[int, ...], ...] = tuple(
    s for size in (1, 2, 3) for s in combinations(range(3), size))


class TorusError(ValueError):
    pass


@dataclass(frozen=True)
class IsotropyDescriptor:
    """Isotropy ≅ T^torus_rank × ∏ Z_d over d in finite_part."""

    torus_rank: int
    finite_part: tuple[int, ...] = ()

    @property
    def is_trivial(self) -> bool:
        return self.torus_rank == 0 and not self.finite_part

    @property
    def finite_order(self) -> int:
        out = 1
        for d in self.finite_part:
            out *= d
        return out

    def __str__(self) -> str:
        parts = [f"T^{self.torus_rank}"] if self.torus_rank else []
        parts += [f"Z_{d}" for d in self.finite_part]
        return " x ".join(parts) or "1"


@dataclass(frozen=True)
class OrbitStratum:
    support: tuple[int, ...]
    isotropy: IsotropyDescriptor
    orbit_dimension: int

    def to_dict(self) -> dict:
        return {
            "support": [j + 1 for j in self.support],
            "torus_rank": self.isotropy.torus_rank,
            "finite_part": list(self.isotropy.finite_part),
            "orbit_dim": self.orbit_dimension,
        }


@dataclass(frozen=True)
class WeightMatrix:
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, W: Sequence[Sequence[int]] | Sequence[int]) -> "WeightMatrix":
        if W and isinstance(W[0], int):
            W = [W]
        return cls(tuple(tuple(int(v) for v in row) for row in W))

    def __post_init__(self):
        if not 1 <= len(self.rows) <= 3 or any(len(r) != 3 for r in self.rows):
            raise TorusError("W must be k x 3 with 1 <= k <= 3")

    @property
    def k(self) -> int:
        return len(self.rows)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def submatrix(self, support: Sequence[int]) -> list[list[int]]:
        return [[row[j] for j in support] for row in self.rows]

    @cached_property
    def rank(self) -> int:
        return smith_normal_form(self.rows).rank

    @property
    def effective(self) -> bool:
        """T^k acts with finite kernel (W has rank k)."""
        return self.rank == self.k

    def kernel_witness(self) -> tuple[int, ...] | None:
        """A nonzero v in Z^k with v·W = 0 (a circle acting trivially), if any."""
        if self.effective:
            return None
        snf = smith_normal_form(transpose(self.rows))  # 3 x k
        col = snf.rank
        return tuple(snf.right[i][col] for i in range(self.k))

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def isotropy_at(W: WeightMatrix, support: Sequence[int]) -> IsotropyDescriptor:
    """Stabilizer of a point whose nonzero coordinates are exactly ``support``."""
    support = tuple(support)
    if not support:
        raise TorusError("support must be nonempty")
    snf = smith_normal_form(W.submatrix(support))
    return IsotropyDescriptor(W.k - snf.rank, snf.invariant_factors)


def _in_lattice(gens: list[tuple[int, ...]], v: tuple[int, ...]) -> bool:
    """v ∈ span_Z(gens)."""
    if not any(v):
        return True
    if not gens:
        return False
    k = len(v)
    M = [[g[i] for g in gens] for i in range(k)]  # k x m, columns = gens
    snf = smith_normal_form(M)
    w = [sum(snf.left[i][t] * v[t] for t in range(k)) for i in range(k)]
    for i in range(k):
        d = snf.diagonal[i] if i < len(snf.diagonal) else 0
        if (d == 0 and w[i]) or (d and w[i] % d):
            return False
    return True


def same_isotropy(W: WeightMatrix, s1: Sequence[int], s2: Sequence[int]) -> bool:
    """Stabilizers agree iff the weight lattices of the two supports agree."""
    g1 = [W.column(j) for j in s1]
    g2 = [W.column(j) for j in s2]
    return all(_in_lattice(g2, v) for v in g1) and all(_in_lattice(g1, v) for v in g2)


@dataclass(frozen=True)
class ActionClassification:
    weights: WeightMatrix
    principal_isotropy: IsotropyDescriptor
    strata: tuple[OrbitStratum, ...]
    isotropy_types: tuple[tuple[IsotropyDescriptor, tuple[tuple[int, ...], ...]], ...]
    fixed_point_free: bool
    free: bool
    pseudo_free: bool
    singular_orbits: int


def classify_action(W: WeightMatrix) -> ActionClassification:
    if not W.effective:
        raise TorusError(f"action is not effective; kernel direction {W.kernel_witness()}")
    strata = tuple(OrbitStratum(s, iso := isotropy_at(W, s), W.k - iso.torus_rank)
                   for s in SUPPORTS)
    full = SUPPORTS[-1]
    principal = strata[-1].isotropy

    groups: list[list[tuple[int, ...]]] = []
    for s in SUPPORTS:
        for g in groups:
            if same_isotropy(W, g[0], s):
                g.append(s)
                break
        else:
            groups.append([s])
    by_support = {st.support: st for st in strata}
    types = tuple((by_support[g[0]].isotropy, tuple(g)) for g in groups)

    fixed_point_free = all(st.isotropy.torus_rank < W.k for st in strata)
    free = all(st.isotropy.is_trivial for st in strata)
    singular = [s for s in SUPPORTS if not same_isotropy(W, s, full)]
    pseudo_free = fixed_point_free and all(len(s) == 1 for s in singular)
    return ActionClassification(
        weights=W,
        principal_isotropy=principal,
        strata=strata,
        isotropy_types=types,
        fixed_point_free=fixed_point_free,
        free=free,
        pseudo_free=pseudo_free,
        singular_orbits=sum(1 for s in singular if len(s) == 1),
    )


@dataclass(frozen=True)
class OrbitSumResult:
    lhs: int
    terms: tuple[tuple[tuple[int, ...], int], ...]  # (columns fixed by H, r(H)+1)

    @property
    def total(self) -> int:
        return sum(t for _, t in self.terms)

    @property
    def holds(self) -> bool:
        return self.total == self.lhs


def orbit_sum_check(W: WeightMatrix) -> OrbitSumResult:
    """Sum of r(H)+1 over corank-1 isotropy subtori H; should equal dim S⁵ + 1."""
    if W.k != 2:
        raise TorusError("the sum identity concerns T² actions")
    cls = classify_action(W)
    if not cls.fixed_point_free:
        raise TorusError("action has a fixed point")
    # each H fixes the sphere on a maximal support whose isotropy contains a circle;
    # that fixed sphere has dimension r(H) = 2|support| - 1
    circle = [st.support for st in cls.strata if st.isotropy.torus_rank == W.k - 1]
    maximal = [s for s in circle if not any(set(s) < set(t) for t in circle)]
    terms = tuple((s, 2 * len(s)) for s in maximal)
    return OrbitSumResult(lhs=6, terms=terms)


@dataclass(frozen=True)
class Membership:
    member: bool
    along_orbits: bool
    witness: tuple[Fraction, ...] | None


def cyclic_in_torus(W: WeightMatrix, N: int, angles: Sequence[int]) -> Membership:
    """Is z_j -> e^{2πi a_j/N} z_j the image of some θ ∈ T^k?"""
    if N < 1:
        raise TorusError("N must be positive")
    if len(angles) != 3:
        raise TorusError("need one residue per coordinate")
    a = [int(x) % N for x in angles]
    Wt = transpose(W.rows)  # 3 x k; want Wt θ ≡ a/N mod 1
    snf = smith_normal_form(Wt)
    La = [sum(snf.left[i][t] * a[t] for t in range(3)) for i in range(3)]
    r = snf.rank
    if any(La[i] % N for i in range(r, 3)):
        return Membership(False, False, None)
    phi = [Fraction(La[i], N * snf.diagonal[i]) for i in range(r)] + [Fraction(0)] * (W.k - r)
    theta = tuple(sum((snf.right[i][t] * phi[t] for t in range(W.k)), Fraction(0)) % 1
                  for i in range(W.k))
    image = [sum(Wt[j][i] * theta[i] for i in range(W.k)) for j in range(3)]
    if any((image[j] - Fraction(a[j], N)).denominator != 1 for j in range(3)):
        raise AssertionError("torus witness failed verification")
    return Membership(True, True, theta)


def torus_report(W: WeightMatrix) -> dict:
    cls = classify_action(W)
    out = {
        "k": W.k,
        "W": W.to_list(),
        "effective": W.effective,
        "principal_isotropy": {"torus_rank": cls.principal_isotropy.torus_rank,
                               "finite_part": list(cls.principal_isotropy.finite_part)},
        "strata": [st.to_dict() for st in cls.strata],
        "flags": {"free": cls.free, "pseudo_free": cls.pseudo_free,
                  "fixed_point_free": cls.fixed_point_free},
        "singular_orbits": cls.singular_orbits,
        "orbit_sum": None,
    }
    if W.k == 2 and cls.fixed_point_free:
        t = orbit_sum_check(W)
        out["orbit_sum"] = {
            "terms": [{"columns": [j + 1 for j in cols], "value": v} for cols, v in t.terms],
            "total": t.total,
            "holds": t.holds,
        }
    return out


__all__ = [
    "ActionClassification", "IsotropyDescriptor", "Membership", "OrbitStratum",
    "OrbitSumResult", "TorusError", "WeightMatrix", "classify_action", "cyclic_in_torus",
    "isotropy_at", "same_isotropy", "orbit_sum_check", "torus_report",
]

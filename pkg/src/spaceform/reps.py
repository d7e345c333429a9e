"""Exact block-rotation representations of space-form groups on S⁵ ⊂ C³ = R⁶.

An element is a cyclic shift of the three complex coordinates followed by a
rotation of each coordinate plane through a rational multiple of 2π:

    (shift s, angles a)·(z_1, z_2, z_3)_b = e^{2πi a_b} z_{b+s}    (indices mod 3)

Everything relational (group laws, freeness) is decided in exact rational
arithmetic; floating point only enters for metric quantities.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .groups import GroupElement, MetacyclicPresentation, validate_presentation

# vol(S^5) = 2 π^3 / Γ(3) = π^3
SPHERE5_VOLUME = math.pi ** 3


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class RationalAngle:
    """Rotation through 2π·numerator/denominator, stored in lowest terms in [0, 1)."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator == 0:
            raise ZeroDivisionError("angle denominator is zero")
        f = Fraction(self.numerator, self.denominator) % 1
        object.__setattr__(self, "numerator", f.numerator)
        object.__setattr__(self, "denominator", f.denominator)

    @classmethod
    def of(cls, x) -> "RationalAngle":
        if isinstance(x, RationalAngle):
            return x
        f = Fraction(x)
        return cls(f.numerator, f.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __add__(self, other) -> "RationalAngle":
        return RationalAngle.of(self.value + RationalAngle.of(other).value)

    def __neg__(self) -> "RationalAngle":
        return RationalAngle.of(-self.value)

    def __sub__(self, other) -> "RationalAngle":
        return self + (-RationalAngle.of(other))

    def __mul__(self, k: int) -> "RationalAngle":
        return RationalAngle.of(self.value * k)

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    def distance_to_integer(self) -> Fraction:
        v = self.value
        return min(v, 1 - v)

    def radians(self) -> float:
        return 2 * math.pi * self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class BlockRotationElement:
    shift: int
    angles: tuple[RationalAngle, RationalAngle, RationalAngle]

    def __post_init__(self):
        object.__setattr__(self, "shift", self.shift % 3)
        if len(self.angles) != 3:
            raise ValueError("need exactly three block angles")
        object.__setattr__(self, "angles", tuple(RationalAngle.of(a) for a in self.angles))

    @classmethod
    def diag(cls, *angles) -> "BlockRotationElement":
        return cls(0, tuple(angles))

    @classmethod
    def identity(cls) -> "BlockRotationElement":
        return cls(0, (0, 0, 0))

    def __matmul__(self, other: "BlockRotationElement") -> "BlockRotationElement":
        s = self.shift
        return BlockRotationElement(
            s + other.shift,
            tuple(self.angles[b] + other.angles[(b + s) % 3] for b in range(3)),
        )

    def inverse(self) -> "BlockRotationElement":
        s = self.shift
        return BlockRotationElement(-s, tuple(-self.angles[(b - s) % 3] for b in range(3)))

    def power(self, k: int) -> "BlockRotationElement":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = BlockRotationElement.identity()
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    @property
    def is_identity(self) -> bool:
        return self.shift == 0 and all(a.is_zero for a in self.angles)

    @property
    def angle_sum(self) -> RationalAngle:
        return self.angles[0] + self.angles[1] + self.angles[2]

    def eigen_angles(self) -> tuple[RationalAngle, ...]:
        """Rotation angles of the three invariant complex lines (one per eigenvalue pair)."""
        if self.shift == 0:
            return self.angles
        s = self.angle_sum.value
        return tuple(RationalAngle.of((s + t) / 3) for t in range(3))

    def has_fixed_point(self) -> bool:
        if self.shift == 0:
            return any(a.is_zero for a in self.angles)
        return self.angle_sum.is_zero

    def min_displacement_turns(self) -> Fraction:
        """min over unit x of d(x, gx), in units of 2π."""
        return min(a.distance_to_integer() for a in self.eigen_angles())

    def matrix(self) -> np.ndarray:
        M = np.zeros((6, 6))
        for b in range(3):
            src = (b + self.shift) % 3
            M[2 * b:2 * b + 2, 2 * src:2 * src + 2] = _rot(self.angles[b].radians())
        return M

    def __str__(self) -> str:
        return f"(shift {self.shift}; {', '.join(map(str, self.angles))})"


@dataclass(frozen=True)
class LinearSpaceForm:
    presentation: MetacyclicPresentation
    gen_A: BlockRotationElement
    gen_B: BlockRotationElement

    def relation_failures(self) -> list[str]:
        G, A, B = self.presentation, self.gen_A, self.gen_B
        out = []
        if not A.power(G.m).is_identity:
            out.append("A^m")
        if not B.power(G.n).is_identity:
            out.append("B^n")
        if not (B @ A @ B.inverse() @ A.power(-G.r)).is_identity:
            out.append("BAB⁻¹A^{-r}")
        return out

    def element(self, g: GroupElement) -> BlockRotationElement:
        return self.gen_A.power(g.i) @ self.gen_B.power(g.j)

    def elements(self) -> list[tuple[GroupElement, BlockRotationElement]]:
        A_pows = [BlockRotationElement.identity()]
        for _ in range(1, self.presentation.m):
            A_pows.append(A_pows[-1] @ self.gen_A)
        B_pows = [BlockRotationElement.identity()]
        for _ in range(1, self.presentation.n):
            B_pows.append(B_pows[-1] @ self.gen_B)
        return [(g, A_pows[g.i] @ B_pows[g.j]) for g in self.presentation.elements()]

    def is_faithful(self) -> bool:
        return len({e for _, e in self.elements()}) == self.presentation.order

    @property
    def order(self) -> int:
        return self.presentation.order


def make_rep(presentation: MetacyclicPresentation, gen_A: BlockRotationElement,
             gen_B: BlockRotationElement) -> LinearSpaceForm:
    rep = LinearSpaceForm(presentation, gen_A, gen_B)
    bad = rep.relation_failures()
    if bad:
        raise RepresentationError(f"relations not satisfied: {', '.join(bad)} != identity")
    return rep


def build_standard_rep(m: int, n: int, r: int, bottom_block_numerator: int = 3) -> LinearSpaceForm:
    """A = diag(R(1/m), R(r/m), R(r²/m)); B = block shift with bottom block R(c/n)."""
    G = validate_presentation(m, n, r)
    A = BlockRotationElement.diag(Fraction(1, m), Fraction(r, m), Fraction(r * r, m))
    if n == 1:
        B = BlockRotationElement.identity()
    else:
        B = BlockRotationElement(1, (0, 0, Fraction(bottom_block_numerator, n)))
        b_order = 3 * (Fraction(bottom_block_numerator, n) % 1).denominator
        if b_order != n:
            raise RepresentationError(
                f"B has order {b_order}, not n={n}, for bottom block {bottom_block_numerator}/{n}")
    return make_rep(G, A, B)


def lens_rep(N: int, weights: Sequence[int] = (1, 1, 1)) -> LinearSpaceForm:
    """Cyclic group Z_N acting by diag(R(w_1/N), R(w_2/N), R(w_3/N))."""
    G = validate_presentation(N, 1, 1 % N)
    A = BlockRotationElement.diag(*(Fraction(w, N) for w in weights))
    return make_rep(G, A, BlockRotationElement.identity())


# ---------------------------------------------------------------- freeness


@dataclass(frozen=True)
class FreeVerdict:
    free: bool
    witness: GroupElement | None = None


def is_free_representation(rep: LinearSpaceForm) -> FreeVerdict:
    for g, e in rep.elements():
        if not e.is_identity and e.has_fixed_point():
            return FreeVerdict(False, g)
    return FreeVerdict(True)


def displacement(rep: LinearSpaceForm | None, element, point: Sequence[float]) -> float:
    """Round-metric distance arccos<x, gx> on S⁵(1)."""
    if isinstance(element, GroupElement):
        element = rep.element(element)
    x = np.asarray(point, dtype=float)
    c = float(x @ element.matrix() @ x)
    return math.acos(min(1.0, max(-1.0, c)))


# ------------------------------------------------------ injectivity radius


@dataclass(frozen=True)
class InjectivityGeometry:
    order: int
    volume: float
    min_injrad: float
    min_injrad_over_pi: Fraction
    max_injrad: float
    max_point: tuple[float, ...]
    restarts: int
    restart_values: tuple[float, ...]
    collapse_ratio: float

    @property
    def injrad_ratio(self) -> float:
        """volume / min injectivity radius."""
        return self.volume / self.min_injrad

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "volume": self.volume,
            "min_injrad": self.min_injrad,
            "max_injrad": {"value": self.max_injrad, "point": list(self.max_point),
                           "restarts": self.restarts,
                           "spread": max(self.restart_values) - min(self.restart_values)
                           if self.restart_values else 0.0},
            "collapse_ratio": self.collapse_ratio,
            "injrad_ratio": self.injrad_ratio,
        }


def _symmetric_parts(rep: LinearSpaceForm) -> np.ndarray:
    mats = [e.matrix() for _, e in rep.elements() if not e.is_identity]
    S = np.array(mats).reshape(-1, 6, 6)
    return 0.5 * (S + S.transpose(0, 2, 1))


def injrad_at(rep: LinearSpaceForm, point: Sequence[float]) -> float:
    S = _symmetric_parts(rep)
    if S.shape[0] == 0:
        return math.pi
    x = np.asarray(point, dtype=float)
    return 0.5 * math.acos(min(1.0, max(-1.0, kernels.max_quadratic(S, x))))


def _tori_starts(count: int) -> np.ndarray:
    """Deterministic starts on the product tori |z_b| = const, spread over a grid."""
    pts = []
    levels = 4
    for a in range(levels + 1):
        for b in range(levels + 1 - a):
            w = np.array([a, b, levels - a - b], dtype=float) / levels
            for t in range(3):
                phases = 2 * np.pi * np.array([0.0, t / 3 + 0.1, 2 * t / 3 + 0.23])
                z = np.sqrt(w) * np.exp(1j * phases)
                pts.append(np.column_stack([z.real, z.imag]).ravel())
    pts = np.array(pts)
    idx = np.linspace(0, len(pts) - 1, count).round().astype(int) if count <= len(pts) \
        else np.arange(count) % len(pts)
    return pts[idx]


def _maximin_restart(S: np.ndarray, start: np.ndarray, seed: int, iters: int) -> tuple[float, np.ndarray]:
    rng = np.random.default_rng(seed)
    x = start / np.linalg.norm(start)
    x = x + 1e-3 * rng.standard_normal(6)
    x /= np.linalg.norm(x)
    noise = rng.standard_normal((iters, 6))
    c = kernels.maximin_ascent(S, x, noise, 0.2, 1e-9)
    return 0.5 * math.acos(min(1.0, max(-1.0, c))), x


def injectivity_geometry(rep: LinearSpaceForm, sampler: str = "uniform", restarts: int = 32,
                         iters: int = 4000, seed: int = 0, workers: int = 1) -> InjectivityGeometry:
    if not is_free_representation(rep).free:
        raise RepresentationError("injectivity geometry needs a free representation")
    volume = SPHERE5_VOLUME / rep.order
    nontrivial = [e for _, e in rep.elements() if not e.is_identity]
    if not nontrivial:
        # convention: empty displacement set, injrad capped at the diameter π
        pt = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return InjectivityGeometry(rep.order, volume, math.pi, Fraction(1), math.pi, pt, 0, (),
                                   volume / math.pi)
    turns = min(e.min_displacement_turns() for e in nontrivial)
    min_injrad = math.pi * float(turns)
    S = _symmetric_parts(rep)
    if sampler == "uniform":
        starts = np.random.default_rng(seed).standard_normal((restarts, 6))
    elif sampler == "tori":
        starts = _tori_starts(restarts)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    seeds = [seed ^ k for k in range(restarts)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(_maximin_restart, [S] * restarts, starts, seeds, [iters] * restarts))
    else:
        results = [_maximin_restart(S, s, sd, iters) for s, sd in zip(starts, seeds)]
    values = tuple(v for v, _ in results)
    best = int(np.argmax(values))
    max_injrad = values[best]
    return InjectivityGeometry(
        order=rep.order,
        volume=volume,
        min_injrad=min_injrad,
        min_injrad_over_pi=turns,
        max_injrad=max_injrad,
        max_point=tuple(float(v) for v in results[best][1]),
        restarts=restarts,
        restart_values=values,
        collapse_ratio=volume / max_injrad,
    )


# ---------------------------------------------------------- π1 invariance


def torus_element(weights: Sequence[Sequence[int]], theta: Sequence[Fraction]) -> BlockRotationElement:
    """t(θ) = diag(R(<w_1, θ>), R(<w_2, θ>), R(<w_3, θ>)), weights given as k rows of 3."""
    k = len(weights)
    return BlockRotationElement.diag(*(sum(Fraction(weights[a][j]) * theta[a] for a in range(k))
                                       for j in range(3)))


def _next_prime(p: int) -> int:
    p += 1
    while any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        p += 1
    return p


def verify_pi1_invariance(rep: LinearSpaceForm, weights: Sequence[Sequence[int]],
                          holonomy: dict[str, Sequence[Sequence[int]]]) -> bool:
    """g t(θ) g⁻¹ == t(ρ(g) θ) for g in {A, B}, checked exactly.

    The identity is linear in θ, so testing θ = e_i / p for a prime p exceeding
    twice every entry of the defect matrix decides it for all θ.
    """
    k = len(weights)
    bound = sum(abs(v) for row in weights for v in row)
    rho_max = max(abs(v) for mat in holonomy.values() for row in mat for v in row)
    p = _next_prime(2 * bound * (1 + k * rho_max) + 1)
    thetas: list[tuple[Fraction, ...]] = []
    for prime in (p, _next_prime(p)):
        for a in range(k):
            thetas.append(tuple(Fraction(int(a == b), prime) for b in range(k)))
    for name, g in (("A", rep.gen_A), ("B", rep.gen_B)):
        rho = holonomy[name]
        g_inv = g.inverse()
        for theta in thetas:
            lhs = g @ torus_element(weights, theta) @ g_inv
            rtheta = tuple(sum(Fraction(rho[a][b]) * theta[b] for b in range(k)) for a in range(k))
            if lhs != torus_element(weights, rtheta):
                return False
    return True


def rep_report(rep: LinearSpaceForm, parameters: dict, geometry: InjectivityGeometry | None) -> dict:
    free = is_free_representation(rep)
    out = {
        "parameters": parameters,
        "relations_verified": not rep.relation_failures(),
        "faithful": rep.is_faithful(),
        "free": free.free,
        "free_witness": None if free.witness is None else [free.witness.i, free.witness.j],
        "order": rep.order,
    }
    if geometry is not None:
        g = geometry.to_dict()
        out.update({"volume": g["volume"], "min_injrad": g["min_injrad"],
                    "max_injrad": g["max_injrad"], "collapse_ratio": g["collapse_ratio"],
                    "injrad_ratio": g["injrad_ratio"]})
    return out


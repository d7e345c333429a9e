"""q-extent of 3-dimensional lens spaces L(n; k, l) = S³ / <(z1, z2) -> (ω^k z1, ω^l z2)>.

Points of S³ are stored as real 4-vectors (Re z1, Im z1, Re z2, Im z2).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb, gcd

import numpy as np

from . import kernels

CLAMP_SLACK = 1e-9


class LensError(ValueError):
    pass


class ClampWarning(RuntimeWarning):
    """An arccos argument left [-1, 1] by more than rounding error."""


def _acos(c: float) -> float:
    if abs(c) > 1.0 + CLAMP_SLACK:
        warnings.warn(f"arccos argument {c!r} clamped", ClampWarning, stacklevel=3)
    return math.acos(min(1.0, max(-1.0, c)))


def canonicalize(n: int, k: int, l: int) -> "LensSpace":
    """Representative with 0 < k <= l < n/2 via k -> ±k, l -> ±l and swapping."""
    if n < 2:
        raise LensError(f"n must be >= 2, got {n}")
    if gcd(n, k) != 1 or gcd(n, l) != 1:
        raise LensError(f"k={k} and l={l} must both be coprime to n={n}")
    if n == 2:
        return LensSpace(2, 1, 1)
    k, l = k % n, l % n
    k, l = min(k, n - k), min(l, n - l)
    return LensSpace(n, min(k, l), max(k, l))


@dataclass(frozen=True)
class LensSpace:
    n: int
    k: int
    l: int

    def __post_init__(self):
        if self.n < 2:
            raise LensError(f"n must be >= 2, got {self.n}")
        if gcd(self.n, self.k) != 1 or gcd(self.n, self.l) != 1:
            raise LensError(f"k={self.k} and l={self.l} must both be coprime to n={self.n}")

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        j = np.arange(self.n)
        a = 2 * np.pi * ((self.k * j) % self.n) / self.n
        b = 2 * np.pi * ((self.l * j) % self.n) / self.n
        return np.cos(a), np.sin(a), np.cos(b), np.sin(b)

    def canonical(self) -> "LensSpace":
        return canonicalize(self.n, self.k, self.l)

    @property
    def deck_key(self) -> tuple[int, int]:
        """Equal keys <=> literally the same deck group, up to swapping z1, z2."""
        kinv = pow(self.k, -1, self.n)
        s = self.l * kinv % self.n
        t = pow(s, -1, self.n)
        return self.n, min(s, self.n - s, t, self.n - t)

    def deck(self, g: int, point) -> np.ndarray:
        """Apply the g-th power of the generator."""
        z = as_complex(point)
        w = np.exp(2j * np.pi * g / self.n)
        return as_real(np.array([w ** self.k * z[0], w ** self.l * z[1]]))

    def __str__(self) -> str:
        return f"L({self.n};{self.k},{self.l})"


def as_real(point) -> np.ndarray:
    p = np.asarray(point)
    if np.iscomplexobj(p):
        return np.column_stack([p.real, p.imag]).ravel().astype(float)
    return p.astype(float)


def as_complex(point) -> np.ndarray:
    p = np.asarray(point)
    if np.iscomplexobj(p):
        return p
    return p[0::2] + 1j * p[1::2]


def lens_distance(L: LensSpace, x, y) -> float:
    """min over deck elements g of arccos Re<x, g·y>."""
    x, y = as_real(x), as_real(y)
    return _acos(float(kernels.lens_cos(x, y, *L.tables)))


@dataclass(eq=False)
class Configuration:
    points: np.ndarray

    def __post_init__(self):
        self.points = np.array([as_real(p) for p in self.points], dtype=float)
        norms = np.linalg.norm(self.points, axis=1)
        if self.points.ndim != 2 or self.points.shape[1] != 4:
            raise LensError("configuration points must be 4-vectors")
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise LensError("configuration points must be unit vectors")

    @property
    def q(self) -> int:
        return self.points.shape[0]


def extent_objective(L: LensSpace, config: Configuration) -> float:
    """Average pairwise lens distance of the configuration."""
    P = np.ascontiguousarray(config.points)
    q = P.shape[0]
    D = kernels.pair_distances(P, *L.tables)
    return float(D[np.triu_indices(q, 1)].sum()) / comb(q, 2)


# ------------------------------------------------------------ upper bound


def alpha_q(q: int) -> float:
    if q < 2:
        raise LensError("q must be >= 2")
    return math.pi / (2 * (2 - Fraction(1, (q + 1) // 2)))


def extent_bound_argument(n, q: int):
    """The arccos argument of the closed-form extent bound; vectorizes over n."""
    a = alpha_q(q)
    n = np.asarray(n, dtype=float)
    cr = np.cos(np.pi / np.sqrt(n))
    inner = (cr - np.cos(np.pi / n)) ** 2 + math.sin(a) ** 2 * (
        np.sqrt(n) * np.sin(np.pi / n) - np.sin(np.pi / np.sqrt(n))) ** 2
    return math.cos(a) * cr - 0.5 * np.sqrt(inner)


def extent_upper_bound(n: int, q: int) -> float:
    """Upper bound on xt_q(L(n; k, l)); depends on n and q only."""
    if n < 2:
        raise LensError("n must be >= 2")
    return _acos(float(extent_bound_argument(n, q)))


@dataclass(frozen=True)
class ScanRow:
    n: int
    bound: float
    verdict: bool
    margin: float


@dataclass(frozen=True)
class ScanResult:
    q: int
    rows: tuple[ScanRow, ...]

    @property
    def holds(self) -> bool:
        """Every n >= 61 in range has bound < π/3."""
        return all(r.verdict for r in self.rows if r.n >= 61)


def scan_extent_bound(n_from: int, n_to: int, q: int = 5) -> ScanResult:
    if not 2 <= n_from <= n_to:
        raise LensError("need 2 <= n_from <= n_to")
    ns = np.arange(n_from, n_to + 1)
    arg = extent_bound_argument(ns, q)
    if np.any(np.abs(arg) > 1 + CLAMP_SLACK):
        warnings.warn("arccos argument clamped during scan", ClampWarning, stacklevel=2)
    bounds = np.arccos(np.clip(arg, -1.0, 1.0))
    margins = math.pi / 3 - bounds
    return ScanResult(q, tuple(ScanRow(int(n), float(b), bool(m > 0), float(m))
                               for n, b, m in zip(ns, bounds, margins)))


# ------------------------------------------------------ angle-sum argument


def _leq(a: float, b: float) -> bool:
    return a <= b or math.isclose(a, b, rel_tol=1e-12)


def angle_ratio(N: int) -> Fraction:
    """C(N,3) / (N·C(N-1,2)); equals 1/3 for every N >= 3."""
    return Fraction(comb(N, 3), N * comb(N - 1, 2))


def angle_sum_contradiction(N: int, link_extent_bound: float) -> bool:
    """True iff N isolated fixed points cannot carry the required total angle.

    Each of the N points sees C(N-1, 2) triangle angles, bounded in sum by
    C(N-1, 2)·bound; the C(N, 3) triangles need total angle > C(N, 3)·π.
    """
    if N < 3:
        raise LensError("need N >= 3")
    if not 0 < link_extent_bound <= math.pi:
        raise LensError("bound must lie in (0, π]")
    raw = _leq(N * comb(N - 1, 2) * link_extent_bound, comb(N, 3) * math.pi)
    ratio = angle_ratio(N)
    simplified = _leq(ratio.denominator * link_extent_bound, ratio.numerator * math.pi)
    if raw != simplified:
        raise AssertionError(f"simplified inequality disagrees with raw one at N={N}")
    return simplified


# -------------------------------------------------------------- optimizer


@dataclass(frozen=True)
class OptimizerParams:
    restarts: int = 12
    max_iters: int = 3000
    seed: int = 0
    step_schedule: tuple[float, float] = (0.6, 1e-3)
    polish: tuple[float, ...] = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 1e-6, 1e-7)
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 0 or self.max_iters < 0 or self.workers < 1:
            raise LensError("restarts and max_iters must be >= 0, workers >= 1")
        lo, hi = sorted(self.step_schedule)
        if not (0 < lo <= hi <= math.pi):
            raise LensError("step schedule must lie in (0, π]")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise LensError("seed must be a 64-bit unsigned integer")


@dataclass
class ExtentEstimate:
    space: LensSpace
    q: int
    lower_bound: float
    upper_bound: float
    configuration: Configuration
    optimizer_stats: dict = field(default_factory=dict)

    @property
    def margin_to_pi_over_3(self) -> float:
        return math.pi / 3 - self.upper_bound

    def to_dict(self) -> dict:
        return {
            "space": {"n": self.space.n, "k": self.space.k, "l": self.space.l},
            "q": self.q,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "margin_to_pi_over_3": self.margin_to_pi_over_3,
            "configuration": self.configuration.points.tolist(),
            "optimizer_stats": self.optimizer_stats,
        }


def structured_starts(q: int) -> list[np.ndarray]:
    """Symmetric initial configurations: alternating coordinate circles, Hopf lifts."""
    t = np.arange(q)
    frame = np.zeros((q, 4))
    even = t % 2 == 0
    phase = np.pi * t / q
    frame[even, 0] = np.cos(phase[even])
    frame[even, 1] = np.sin(phase[even])
    frame[~even, 2] = np.cos(phase[~even])
    frame[~even, 3] = np.sin(phase[~even])
    # Hopf lifts of a spiral point set on S²
    z = 1 - 2 * (t + 0.5) / q
    theta = np.arccos(z)
    phi = np.pi * (3 - np.sqrt(5)) * t
    hopf = np.column_stack([np.cos(theta / 2), np.zeros(q),
                            np.sin(theta / 2) * np.cos(phi), np.sin(theta / 2) * np.sin(phi)])
    return [frame, hopf]


def _run(L: LensSpace, P0: np.ndarray, q: int, params: OptimizerParams, run: int) -> tuple[float, np.ndarray, int]:
    rng = np.random.default_rng(params.seed ^ run)
    iters = params.max_iters
    which = rng.integers(0, q, size=iters)
    noise = rng.standard_normal((iters, 4))
    s0, s1 = params.step_schedule
    steps = s0 * (s1 / s0) ** (np.arange(iters) / max(iters - 1, 1))
    P = np.ascontiguousarray(P0, dtype=float).copy()
    accepted = kernels.extent_ascent(P, *L.tables, which, noise, steps,
                                     np.asarray(params.polish, dtype=float))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    return extent_objective(L, Configuration(P)), P, int(accepted)


def optimize_extent(L: LensSpace, q: int, params: OptimizerParams | None = None) -> ExtentEstimate:
    """Best configuration found by multi-start stochastic ascent; a certified lower bound."""
    params = params or OptimizerParams()
    if q < 2:
        raise LensError("q must be >= 2")
    starts = structured_starts(q)
    init_rng = np.random.default_rng(params.seed)
    for _ in range(params.restarts):
        g = init_rng.standard_normal((q, 4))
        starts.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    runs = range(len(starts))
    if params.workers > 1:
        with ThreadPoolExecutor(params.workers) as pool:
            results = list(pool.map(lambda r: _run(L, starts[r], q, params, r), runs))
    else:
        results = [_run(L, starts[r], q, params, r) for r in runs]
    values = [v for v, _, _ in results]
    best = int(np.argmax(values))
    config = Configuration(results[best][1])
    return ExtentEstimate(
        space=L,
        q=q,
        lower_bound=extent_objective(L, config),
        upper_bound=extent_upper_bound(L.n, q),
        configuration=config,
        optimizer_stats={
            "restarts": params.restarts,
            "runs": len(starts),
            "iterations": params.max_iters,
            "seed": params.seed,
            "best_run": best,
            "accepted": [a for _, _, a in results],
            "run_values": values,
        },
    )


def transport_configuration(src: LensSpace, dst: LensSpace, config: Configuration) -> Configuration:
    """Carry a configuration along the isometry src -> dst (sign flips, swap, reparametrization)."""
    if src.deck_key != dst.deck_key:
        raise LensError(f"{src} and {dst} are not related by the standard isometries")
    P = config.points.copy()
    n = src.n

    def normal(L):
        kinv = pow(L.k, -1, n)
        return L.l * kinv % n

    s, t = normal(src), normal(dst)
    # src has deck group {(ω^j, ω^{sj})}; map into dst's group {(ω^j, ω^{tj})}
    if t == s:
        return Configuration(P)
    if t == (n - s) % n:
        P[:, 3] *= -1
        return Configuration(P)
    sinv = pow(s, -1, n)
    P = P[:, [2, 3, 0, 1]]
    if t == (n - sinv) % n:
        P[:, 3] *= -1
    return Configuration(P)


# ----------------------------------------------------------- grid oracle


def grid_max_distance(L: LensSpace, x0, resolution: float = 0.05) -> float:
    """max over a Hopf-coordinate grid of y ∈ S³ of d(x0, y)."""
    eta = np.arange(0.0, np.pi / 2 + 1e-12, resolution)
    xi = np.arange(0.0, 2 * np.pi, resolution)
    E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
    Y = np.stack([np.cos(E) * np.cos(X1), np.cos(E) * np.sin(X1),
                  np.sin(E) * np.cos(X2), np.sin(E) * np.sin(X2)], axis=-1).reshape(-1, 4)
    x = as_real(x0)
    c = kernels.lens_cos(np.broadcast_to(x, Y.shape), Y, *L.tables)
    return float(np.arccos(np.clip(c, -1.0, 1.0)).max())

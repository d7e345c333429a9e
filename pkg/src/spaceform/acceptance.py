"""Acceptance criteria A1-A10 as plain functions returning a verdict and evidence."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from math import comb, gcd
from typing import Callable

import numpy as np

from . import groups, lens, reps, torus

PI2 = math.pi ** 2


@dataclass(frozen=True)
class Criterion:
    id: str
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{self.id} {'PASS' if self.passed else 'FAIL'}  {self.title}  ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed, "detail": self.detail}


def _timed(fn: Callable[[], tuple[bool, dict]], cid: str, title: str) -> Criterion:
    t0 = time.perf_counter()
    ok, detail = fn()
    return Criterion(cid, title, bool(ok), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------- A1


def a1_bound_below_pi_over_3(margin_tol: float = 1e-6) -> Criterion:
    def run():
        t0 = time.perf_counter()
        scan = lens.scan_extent_bound(61, 10_000, q=5)
        elapsed = time.perf_counter() - t0
        margin61 = scan.rows[0].margin
        failing = [r.n for r in scan.rows if not r.verdict]
        ok = scan.holds and margin61 > margin_tol and elapsed < 1.0
        return ok, {"margin_at_61": margin61, "margin_tolerance": margin_tol,
                    "failing_n": failing[:20]}
    return _timed(run, "A1", "5-extent bound below pi/3 for 61 <= n <= 10000")


# ---------------------------------------------------------------------- A2

A2_NS = (2, 3, 5, 7, 61, 100)
A2_QS = (2, 3, 4, 5)


def canonical_pairs(n: int) -> list[tuple[int, int]]:
    if n == 2:
        return [(1, 1)]
    units = [k for k in range(1, (n + 1) // 2) if gcd(k, n) == 1 and 2 * k < n]
    return [(k, l) for i, k in enumerate(units) for l in units[i:]]


def a2_lower_below_upper(params: lens.OptimizerParams | None = None) -> Criterion:
    params = params or lens.OptimizerParams()

    def run():
        t0 = time.perf_counter()
        cells = violations = 0
        worst = -math.inf
        classes = 0
        for n in A2_NS:
            solved: dict[tuple, dict[int, lens.ExtentEstimate]] = {}
            for k, l in canonical_pairs(n):
                L = lens.LensSpace(n, k, l)
                key = L.deck_key
                if key not in solved:
                    solved[key] = {q: lens.optimize_extent(L, q, params) for q in A2_QS}
                    classes += 1
                for q in A2_QS:
                    est = solved[key][q]
                    cfg = lens.transport_configuration(est.space, L, est.configuration)
                    lower = lens.extent_objective(L, cfg)
                    upper = lens.extent_upper_bound(n, q)
                    cells += 1
                    worst = max(worst, lower - upper)
                    violations += lower > upper + 1e-9
        elapsed = time.perf_counter() - t0
        return violations == 0 and elapsed < 300, {
            "cells": cells, "isometry_classes": classes, "violations": violations,
            "max_lower_minus_upper": worst}
    return _timed(run, "A2", "optimizer lower bounds never exceed the closed-form bound")


# ---------------------------------------------------------------------- A3


def a3_rp3_oracle(params: lens.OptimizerParams | None = None, resolution: float = 0.05) -> Criterion:
    params = params or lens.OptimizerParams()

    def run():
        L = lens.LensSpace(2, 1, 1)
        est = lens.optimize_extent(L, 2, params)
        grid = lens.grid_max_distance(L, [1.0, 0.0, 0.0, 0.0], resolution)
        # fixing x is harmless: the isometry group of RP³ acts transitively
        ok = (est.lower_bound >= math.pi / 2 - 1e-3
              and abs(grid - math.pi / 2) <= resolution
              and grid <= math.pi / 2 + 1e-12)
        return ok, {"lower_bound": est.lower_bound, "grid_max": grid, "resolution": resolution}
    return _timed(run, "A3", "RP3 2-extent equals pi/2 (optimizer and grid oracle)")


# ---------------------------------------------------------------------- A4


def a4_angle_sum() -> Criterion:
    def run():
        at = lens.angle_sum_contradiction(6, math.pi / 3)
        above = lens.angle_sum_contradiction(6, math.pi / 3 + 0.01)
        identity = all(comb(N, 3) * 3 == N * comb(N - 1, 2) for N in range(3, 101))
        return at and not above and identity, {
            "six_at_pi_over_3": at, "six_above": above, "ratio_identity": identity}
    return _timed(run, "A4", "angle-sum contradiction and the 1/3 identity")


# ---------------------------------------------------------------------- A5


def a5_harness(order_cap: int = 2000) -> Criterion:
    def run():
        t0 = time.perf_counter()
        rep = groups.spherical_criterion_harness(order_cap, dedupe=False)
        elapsed = time.perf_counter() - t0
        return rep.ok and elapsed < 300, {
            "order_cap": order_cap, "presentations": rep.presentations,
            "hypotheses_met": rep.hypotheses_met, "counterexamples": rep.counterexamples[:10]}
    return _timed(run, "A5", f"metacyclic harness up to order {order_cap}")


# ---------------------------------------------------------------------- A6


def a6_gamma_792() -> Criterion:
    def run():
        G = groups.MetacyclicPresentation(7, 9, 2)
        sph = groups.is_spherical_5_space_group(G).verdict
        # brute-force center: elements commuting with everything
        N = G.order
        brute = np.array([all(G.commutes(x, y) for y in range(N)) for x in range(N)])
        b3 = G.index(G.power(G.B, 3))
        center_ok = (brute == G.closure_mask([b3])).all() and brute.sum() == 3
        ab = groups.abelianization(G)
        petrie = groups.is_spherical_5_space_group(groups.MetacyclicPresentation(7, 3, 2)).verdict
        ok = sph and center_ok and N // int(brute.sum()) == 21 and ab == (9,) and not petrie
        return ok, {"spherical": sph, "center_order": int(brute.sum()),
                    "center_is_B3": bool(center_ok), "abelianization": list(ab),
                    "petrie_spherical": petrie}
    return _timed(run, "A6", "structure of Gamma(7,9,2) and the Petrie group")


# ---------------------------------------------------------------------- A7


def a7_torus_model() -> Criterion:
    def run():
        W = torus.WeightMatrix.of([[1, 1, -2], [1, -2, 1]])
        c = torus.classify_action(W)
        t = torus.orbit_sum_check(W)
        diag = torus.classify_action(torus.WeightMatrix.of([1, 1, 1]))
        ok = (c.pseudo_free and c.principal_isotropy == torus.IsotropyDescriptor(0, (3,))
              and c.singular_orbits == 3 and t.total == 6 and diag.free)
        return ok, {"pseudo_free": c.pseudo_free, "principal": str(c.principal_isotropy),
                    "singular_orbits": c.singular_orbits, "sum": t.total, "diagonal_free": diag.free}
    return _timed(run, "A7", "pseudo-free T2 model and the free diagonal circle")


# ---------------------------------------------------------------------- A8


def eigen_fixed_point(matrix: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.any(np.abs(np.linalg.eigvals(matrix) - 1.0) < tol))


def a8_rep_exactness() -> Criterion:
    def run():
        rep = reps.build_standard_rep(7, 9, 2, 3)
        failures = rep.relation_failures()
        free = reps.is_free_representation(rep).free
        mismatches = [str(g) for g, e in rep.elements()
                      if not e.is_identity and e.has_fixed_point() != eigen_fixed_point(e.matrix())]
        return not failures and free and not mismatches, {
            "relation_failures": failures, "free": free, "oracle_mismatches": mismatches}
    return _timed(run, "A8", "standard rep of Gamma(7,9,2): relations, freeness, eigen oracle")


# ---------------------------------------------------------------------- A9

A9_EQUALITY_NS = (2, 5, 50, 500)


def rep_catalog() -> dict[str, reps.LinearSpaceForm]:
    """Free representations exercised by the collapse-ratio criterion."""
    cat = {f"L({n};1,1)": reps.lens_rep(n) for n in (1, 2, 3, 5, 7, 50)}
    cat["Gamma(7,9,2),c=3"] = reps.build_standard_rep(7, 9, 2, 3)
    return cat


def a9_collapse_ratio(seed: int = 0, restarts: int = 16, iters: int = 3000) -> Criterion:
    def run():
        equality = {}
        for n in A9_EQUALITY_NS:
            g = reps.injectivity_geometry(reps.lens_rep(n), restarts=4, iters=200, seed=seed)
            equality[n] = g.collapse_ratio
        eq_ok = all(abs(v - PI2) <= 1e-9 for v in equality.values())
        catalog = {}
        for name, rep in rep_catalog().items():
            g = reps.injectivity_geometry(rep, restarts=restarts, iters=iters, seed=seed)
            catalog[name] = {"collapse_ratio": g.collapse_ratio, "injrad_ratio": g.injrad_ratio}
        below = sorted(k for k, v in catalog.items() if v["collapse_ratio"] < PI2 - 1e-6)
        return eq_ok and not below, {"equality_case": {str(k): v for k, v in equality.items()},
                                     "catalog": catalog, "below_pi_squared": below}
    return _timed(run, "A9", "collapse ratio at least pi^2 (equality for L(n;1,1))")


# --------------------------------------------------------------------- A10


def a10_replay(cases: list[tuple[str, dict]] | None = None) -> Criterion:
    from .commands import execute
    from .reports import Report, RunConfig

    cases = cases or [
        ("groups.check", {"m": 7, "n": 9, "r": 2}),
        ("groups.harness", {"max_order": 63, "dedupe": True}),
        ("extent.optimize", {"n": 7, "k": 1, "l": 2, "q": 4}),
        ("extent.scan", {"q": 5, "from": 55, "to": 70}),
        ("torus.analyze", {"weights": [[1, 1, -2], [1, -2, 1]]}),
        ("rep.verify", {"m": 7, "n": 9, "r": 2, "c": 3}),
    ]
    config = RunConfig(seed=20240917, restarts=4, max_iters=800)

    def run():
        results = {}
        for name, args in cases:
            first = execute(name, args, config)
            parsed = Report.from_json(first.to_json())
            again = execute(parsed.command, parsed.arguments, parsed.config)
            results[name] = parsed == first and again.payload_json() == first.payload_json()
        return all(results.values()), {"cases": results}
    return _timed(run, "A10", "replaying embedded configs reproduces payloads bit-for-bit")


# ------------------------------------------------------------------ runner


def run_all(order_cap: int = 2000, seed: int = 0, restarts: int = 12, max_iters: int = 3000,
            a1_margin: float = 1e-6) -> list[Criterion]:
    params = lens.OptimizerParams(restarts=restarts, max_iters=max_iters, seed=seed)
    return [
        a1_bound_below_pi_over_3(a1_margin),
        a2_lower_below_upper(params),
        a3_rp3_oracle(params),
        a4_angle_sum(),
        a5_harness(order_cap),
        a6_gamma_792(),
        a7_torus_model(),
        a8_rep_exactness(),
        a9_collapse_ratio(seed),
        a10_replay(),
    ]


def matrix_json(results: list[Criterion]) -> str:
    return json.dumps([c.to_dict() for c in results], indent=2, default=str)

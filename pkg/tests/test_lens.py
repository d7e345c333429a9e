from __future__ import annotations

import math
import warnings
from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spaceform.lens import (
    ClampWarning,
    Configuration,
    LensError,
    LensSpace,
    OptimizerParams,
    _acos,
    alpha_q,
    angle_ratio,
    angle_sum_contradiction,
    as_complex,
    canonicalize,
    scan_extent_bound,
    extent_objective,
    grid_max_distance,
    extent_upper_bound,
    lens_distance,
    optimize_extent,
    transport_configuration,
)

FAST = OptimizerParams(restarts=4, max_iters=800)


def unit(rng, count):
    x = rng.standard_normal((count, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def brute_distance(L, x, y):
    zx, zy = as_complex(x), as_complex(y)
    best = -1.0
    for j in range(L.n):
        w = np.exp(2j * np.pi * j / L.n)
        best = max(best, float(np.real(np.vdot(zx, [w ** L.k * zy[0], w ** L.l * zy[1]]))))
    return math.acos(min(1.0, best))


spaces = st.integers(2, 40).flatmap(
    lambda n: st.tuples(st.just(n),
                        st.sampled_from([k for k in range(1, n) if gcd(k, n) == 1]),
                        st.sampled_from([k for k in range(1, n) if gcd(k, n) == 1]))
).map(lambda t: LensSpace(*t))


# ------------------------------------------------------------------ spaces


def test_canonicalize_examples():
    assert canonicalize(7, 6, 2) == LensSpace(7, 1, 2)
    assert canonicalize(2, 1, 1) == LensSpace(2, 1, 1)
    assert canonicalize(10, 7, 3) == LensSpace(10, 3, 3)
    with pytest.raises(LensError):
        canonicalize(6, 2, 1)
    with pytest.raises(LensError):
        LensSpace(1, 1, 1)


def test_distance_examples():
    L = LensSpace(4, 1, 1)
    x = [1, 0, 0, 0]
    assert lens_distance(L, x, [0, 1, 0, 0]) == pytest.approx(0.0, abs=1e-7)
    assert lens_distance(L, x, [0, 0, 1, 0]) == pytest.approx(math.pi / 2)
    assert lens_distance(LensSpace(2, 1, 1), x, [-1, 0, 0, 0]) == pytest.approx(0.0, abs=1e-7)


@given(spaces, st.integers(0, 2 ** 32))
def test_distance_matches_bruteforce_and_deck(L, seed):
    rng = np.random.default_rng(seed)
    x, y = unit(rng, 2)
    d = lens_distance(L, x, y)
    assert d == pytest.approx(brute_distance(L, x, y), abs=1e-9)
    g = int(rng.integers(0, L.n))
    assert lens_distance(L, L.deck(g, x), y) == pytest.approx(d, abs=1e-9)
    assert 0 <= d <= math.pi / 2 + 1e-12


@pytest.mark.parametrize("L", [LensSpace(2, 1, 1), LensSpace(5, 1, 2), LensSpace(61, 1, 1)], ids=str)
def test_metric_axioms_on_many_triples(L):
    rng = np.random.default_rng(L.n)
    X, Y, Z = (unit(rng, 100_000) for _ in range(3))
    from spaceform import kernels
    t = L.tables
    dxy = np.arccos(np.clip(kernels.lens_cos(X, Y, *t), -1, 1))
    dyx = np.arccos(np.clip(kernels.lens_cos(Y, X, *t), -1, 1))
    dyz = np.arccos(np.clip(kernels.lens_cos(Y, Z, *t), -1, 1))
    dxz = np.arccos(np.clip(kernels.lens_cos(X, Z, *t), -1, 1))
    assert np.allclose(dxy, dyx, atol=1e-9)
    assert np.all(dxz <= dxy + dyz + 1e-9)
    assert np.allclose(np.arccos(np.clip(kernels.lens_cos(X, X, *t), -1, 1)), 0, atol=1e-6)


@given(spaces, st.integers(2, 6), st.integers(0, 2 ** 32))
def test_objective_invariances(L, q, seed):
    rng = np.random.default_rng(seed)
    P = unit(rng, q)
    base = extent_objective(L, Configuration(P))
    assert extent_objective(L, Configuration(P[rng.permutation(q)])) == pytest.approx(base, abs=1e-12)
    moved = P.copy()
    moved[0] = L.deck(int(rng.integers(L.n)), P[0])
    assert extent_objective(L, Configuration(moved)) == pytest.approx(base, abs=1e-9)
    canon = L.canonical()
    if canon.deck_key == L.deck_key:
        cfg = transport_configuration(L, canon, Configuration(P))
        assert extent_objective(canon, cfg) == pytest.approx(base, abs=1e-9)


def test_configuration_validation():
    with pytest.raises(LensError):
        Configuration(np.array([[1.0, 0, 0, 0], [0.5, 0, 0, 0]]))
    with pytest.raises(LensError):
        Configuration(np.array([[1.0, 0, 0]]))


# --------------------------------------------------------------- optimizer


def test_rp3_two_extent():
    est = optimize_extent(LensSpace(2, 1, 1), 2)
    assert est.lower_bound == pytest.approx(math.pi / 2, abs=1e-6)
    assert est.lower_bound <= est.upper_bound


def test_zero_restarts_still_positive():
    est = optimize_extent(LensSpace(7, 1, 2), 3, OptimizerParams(restarts=0, max_iters=200))
    assert est.lower_bound > 0 and est.optimizer_stats["runs"] == 2


def test_l61_five_extent_below_pi_over_3():
    est = optimize_extent(LensSpace(61, 1, 1), 5, FAST)
    assert est.lower_bound <= est.upper_bound < math.pi / 3
    assert est.margin_to_pi_over_3 > 0
    assert est.lower_bound == pytest.approx(extent_objective(est.space, est.configuration), abs=0)


def test_extent_monotone_in_q():
    L = LensSpace(5, 1, 2)
    vals = [optimize_extent(L, q, FAST).lower_bound for q in (2, 3, 4, 5, 6)]
    assert all(b <= a + 2e-3 for a, b in zip(vals, vals[1:]))


def test_isometric_spaces_agree():
    a = optimize_extent(LensSpace(7, 1, 2), 4, FAST).lower_bound
    b = optimize_extent(LensSpace(7, 2, 1), 4, FAST).lower_bound
    assert abs(a - b) < 2e-3


def test_deterministic_replay_and_workers():
    L = LensSpace(11, 1, 3)
    a = optimize_extent(L, 4, FAST)
    b = optimize_extent(L, 4, FAST)
    c = optimize_extent(L, 4, OptimizerParams(restarts=4, max_iters=800, workers=3))
    assert a.to_dict() == b.to_dict() == c.to_dict()


@pytest.mark.parametrize("kwargs", [{"restarts": -1}, {"workers": 0}, {"seed": -1},
                                    {"step_schedule": (0.0, 1.0)}, {"step_schedule": (1.0, 4.0)}])
def test_invalid_params(kwargs):
    with pytest.raises(LensError):
        OptimizerParams(**kwargs)
    with pytest.raises(LensError):
        optimize_extent(LensSpace(3, 1, 1), 1)


def test_transport_rejects_non_isometric():
    cfg = Configuration(np.eye(4)[:2])
    with pytest.raises(LensError):
        transport_configuration(LensSpace(5, 1, 1), LensSpace(5, 1, 2), cfg)


def test_grid_oracle_rp3():
    g = grid_max_distance(LensSpace(2, 1, 1), [1, 0, 0, 0], 0.05)
    assert math.pi / 2 - 0.05 <= g <= math.pi / 2 + 1e-12


# ------------------------------------------------------------------ bounds


def test_alpha_q_examples():
    assert alpha_q(2) == pytest.approx(math.pi / 2)
    assert alpha_q(3) == pytest.approx(math.pi / 3)
    assert alpha_q(5) == pytest.approx(math.pi / (2 * (2 - 1 / 3)))
    with pytest.raises(LensError):
        alpha_q(1)


def test_bound_at_threshold():
    assert extent_upper_bound(61, 5) < math.pi / 3
    assert math.pi / 3 - extent_upper_bound(61, 5) == pytest.approx(1.6122e-3, abs=1e-6)
    # n = 60 sits on the other side
    assert extent_upper_bound(60, 5) > math.pi / 3


def test_bound_decreases_in_n():
    b = np.array([extent_upper_bound(n, 5) for n in range(2, 10_001)])
    assert np.all(np.diff(b) < 0)


def test_scan_examples():
    scan = scan_extent_bound(55, 70)
    assert [r.n for r in scan.rows if not r.verdict] == list(range(55, 61))
    assert scan.holds
    assert scan_extent_bound(61, 10_000).holds
    with pytest.raises(LensError):
        scan_extent_bound(10, 5)


def test_angle_sum_examples():
    assert angle_ratio(6) == angle_ratio(100) == angle_ratio(3) == Fraction(1, 3)
    assert angle_sum_contradiction(6, math.pi / 3)
    assert not angle_sum_contradiction(6, math.pi / 3 + 0.01)
    with pytest.raises(LensError):
        angle_sum_contradiction(2, 1.0)


def test_clamp_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert _acos(1.0 + 1e-12) == 0.0
    with pytest.warns(ClampWarning):
        assert _acos(1.1) == 0.0

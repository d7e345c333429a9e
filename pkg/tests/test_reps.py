from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spaceform import kernels
from spaceform.groups import GroupElement, MetacyclicPresentation
from spaceform.reps import (
    BlockRotationElement,
    RationalAngle,
    RepresentationError,
    SPHERE5_VOLUME,
    build_standard_rep,
    displacement,
    injectivity_geometry,
    injrad_at,
    is_free_representation,
    lens_rep,
    make_rep,
    verify_pi1_invariance,
)

FREE_CATALOG = [(7, 9, 2, 3), (7, 9, 4, 3), (13, 9, 3, 3), (19, 9, 7, 3), (7, 27, 2, 3),
                (37, 9, 10, 3), (13, 9, 9, 3)]
MODEL_W = [[1, 1, -2], [1, -2, 1]]


def eigen_fixed(M: np.ndarray) -> bool:
    return bool(np.any(np.abs(np.linalg.eigvals(M) - 1.0) < 1e-8))


def max_element_order(rep) -> int:
    N = rep.presentation
    return int(kernels.element_orders(*N._k).max())


angles = st.fractions(min_value=-3, max_value=3, max_denominator=60)
elements = st.builds(lambda s, a, b, c: BlockRotationElement(s, (a, b, c)),
                     st.integers(0, 2), angles, angles, angles)


# ------------------------------------------------------------------ angles


def test_rational_angle_normalizes():
    assert RationalAngle(7, 3) == RationalAngle(1, 3)
    assert RationalAngle(-1, 4) == RationalAngle(3, 4)
    assert RationalAngle(6, 3).is_zero
    assert RationalAngle(5, 6).distance_to_integer() == Fraction(1, 6)
    with pytest.raises(ZeroDivisionError):
        RationalAngle(1, 0)


@given(angles, angles)
def test_rational_angle_arithmetic(a, b):
    x, y = RationalAngle.of(a), RationalAngle.of(b)
    assert (x + y).value == (a + b) % 1
    assert (x - y + y) == x
    assert 0 <= x.value < 1


# ------------------------------------------------------- exact vs matrices


@given(elements, elements)
def test_exact_product_matches_matrices(g, h):
    assert np.allclose((g @ h).matrix(), g.matrix() @ h.matrix(), atol=1e-12)
    assert np.allclose(g.inverse().matrix(), g.matrix().T, atol=1e-12)
    assert (g @ g.inverse()).is_identity


@given(elements, st.integers(-20, 20))
def test_power_matches_matrix_power(g, k):
    M = np.linalg.matrix_power(g.matrix(), abs(k))
    if k < 0:
        M = M.T
    assert np.allclose(g.power(k).matrix(), M, atol=1e-10)


@given(elements)
def test_eigen_angles_match_spectrum(g):
    spectrum = np.linalg.eigvals(g.matrix())
    exact = [np.exp(sign * 2j * math.pi * float(a.value)) for a in g.eigen_angles() for sign in (1, -1)]
    key = lambda z: (round(z.real, 6), round(z.imag, 6))
    assert np.allclose(sorted(spectrum, key=key), sorted(exact, key=key), atol=1e-7)
    assert g.has_fixed_point() == eigen_fixed(g.matrix())


@pytest.mark.parametrize("params", [(7, 9, 2, 3), (7, 9, 4, 3)])
def test_random_pairs_match_matrices(params):
    rep = build_standard_rep(*params)
    els = rep.elements()
    mats = {g: e.matrix() for g, e in els}
    G = rep.presentation
    rng = np.random.default_rng(1)
    for a, b in rng.integers(0, G.order, size=(1000, 2)):
        ga, gb = els[a][0], els[b][0]
        prod = G.mul(ga, gb)
        assert np.allclose(rep.element(prod).matrix(), mats[ga] @ mats[gb], atol=1e-12)


# ------------------------------------------------------------ construction


def test_standard_rep_examples():
    rep = build_standard_rep(7, 9, 2, 3)
    assert not rep.relation_failures() and rep.is_faithful() and rep.order == 63
    assert is_free_representation(rep).free
    with pytest.raises(RepresentationError, match="order 27"):
        build_standard_rep(7, 9, 2, 1)


def test_cyclic_reps():
    rep = build_standard_rep(5, 1, 1)
    assert rep.gen_B.is_identity and is_free_representation(rep).free
    assert not is_free_representation(lens_rep(6, (1, 2, 3))).free
    assert is_free_representation(lens_rep(7, (1, 2, 3))).free


def test_relation_failure_reported():
    G = MetacyclicPresentation(7, 9, 2)
    A = BlockRotationElement.diag(Fraction(1, 7), Fraction(1, 7), Fraction(1, 7))
    B = BlockRotationElement(1, (0, 0, Fraction(1, 3)))
    with pytest.raises(RepresentationError, match="BAB"):
        make_rep(G, A, B)


@pytest.mark.parametrize("params", FREE_CATALOG, ids=str)
def test_freeness_matches_eigen_oracle(params):
    rep = build_standard_rep(*params)
    verdict = is_free_representation(rep)
    oracle = all(not eigen_fixed(e.matrix()) for _, e in rep.elements() if not e.is_identity)
    assert verdict.free == oracle


def test_non_free_witness():
    rep = lens_rep(2, (1, 1, 0))
    v = is_free_representation(rep)
    assert not v.free and v.witness == GroupElement(1, 0)
    with pytest.raises(RepresentationError):
        injectivity_geometry(rep)


# --------------------------------------------------------------- geometry


def test_displacement_examples():
    rep = lens_rep(4)
    assert displacement(rep, GroupElement(1, 0), [1, 0, 0, 0, 0, 0]) == pytest.approx(math.pi / 2)
    assert displacement(rep, GroupElement(2, 0), [0, 0, 0, 1, 0, 0]) == pytest.approx(math.pi)
    assert displacement(rep, GroupElement(0, 0), [0, 0, 0, 0, 0, 1]) == 0.0


@pytest.mark.parametrize("n", [2, 3, 5, 50])
def test_lens_injrad_is_pi_over_n(n):
    g = injectivity_geometry(lens_rep(n), restarts=4, iters=200)
    assert g.min_injrad == pytest.approx(math.pi / n, abs=1e-15)
    assert g.max_injrad == pytest.approx(math.pi / n, abs=1e-12)
    assert g.collapse_ratio == pytest.approx(math.pi ** 2, rel=1e-12)


def test_trivial_group_convention():
    g = injectivity_geometry(lens_rep(1))
    assert g.min_injrad == g.max_injrad == math.pi
    assert g.volume == SPHERE5_VOLUME


def test_samplers_agree_on_gamma792():
    rep = build_standard_rep(7, 9, 2, 3)
    u = injectivity_geometry(rep, sampler="uniform")
    t = injectivity_geometry(rep, sampler="tori")
    assert abs(u.max_injrad - t.max_injrad) < 1e-4
    assert u.min_injrad == t.min_injrad
    assert u.max_injrad >= u.min_injrad
    assert injrad_at(rep, u.max_point) == pytest.approx(u.max_injrad, abs=1e-12)


def test_workers_match_serial():
    rep = build_standard_rep(7, 9, 2, 3)
    a = injectivity_geometry(rep, restarts=8, iters=500, seed=3)
    b = injectivity_geometry(rep, restarts=8, iters=500, seed=3, workers=4)
    assert a == b


@pytest.mark.parametrize("weights", [(1, 2, 3), (1, 1, 3), (2, 3, 5)])
def test_min_injrad_attained_on_coordinate_circles(weights):
    rep = lens_rep(11, weights)
    g = injectivity_geometry(rep, restarts=4, iters=200)
    exact = min(injrad_at(rep, np.eye(6)[2 * b]) for b in range(3))
    assert g.min_injrad == pytest.approx(exact, abs=1e-12)
    rng = np.random.default_rng(0)
    samples = rng.standard_normal((300, 6))
    assert all(injrad_at(rep, x / np.linalg.norm(x)) >= g.min_injrad - 1e-12 for x in samples)


def test_conjugation_preserves_geometry():
    rep = build_standard_rep(7, 9, 2, 3)
    h = BlockRotationElement(2, (Fraction(1, 5), Fraction(2, 7), Fraction(3, 11)))
    conj = make_rep(rep.presentation, h @ rep.gen_A @ h.inverse(), h @ rep.gen_B @ h.inverse())
    a = injectivity_geometry(rep, restarts=16, iters=2000)
    b = injectivity_geometry(conj, restarts=16, iters=2000)
    assert a.min_injrad == b.min_injrad
    assert abs(a.max_injrad - b.max_injrad) < 1e-3


@pytest.mark.parametrize("params", FREE_CATALOG[:4], ids=str)
def test_min_injrad_ratio_bounded_by_max_order(params):
    # some power of an element of maximal order h rotates a line by 1/h turn
    rep = build_standard_rep(*params)
    g = injectivity_geometry(rep, restarts=2, iters=100)
    h = max_element_order(rep)
    assert g.min_injrad <= math.pi / h + 1e-15
    assert g.injrad_ratio <= math.pi ** 2 * h / rep.order + 1e-9


def test_gamma792_ratio_is_a_third_of_pi_squared():
    g = injectivity_geometry(build_standard_rep(7, 9, 2, 3))
    assert g.min_injrad_over_pi == Fraction(1, 21)
    assert g.injrad_ratio == pytest.approx(math.pi ** 2 / 3, rel=1e-12)
    assert g.collapse_ratio < g.injrad_ratio < math.pi ** 2


# ------------------------------------------------------------ invariance


def test_pi1_invariance_examples():
    rep = build_standard_rep(7, 9, 2, 3)
    ident = [[1, 0], [0, 1]]
    assert not verify_pi1_invariance(rep, MODEL_W, {"A": ident, "B": ident})
    assert verify_pi1_invariance(rep, MODEL_W, {"A": ident, "B": [[0, -1], [1, -1]]})
    assert verify_pi1_invariance(rep, [[1, 1, 1]], {"A": [[1]], "B": [[1]]})
    assert not verify_pi1_invariance(rep, [[1, 1, 1]], {"A": [[1]], "B": [[-1]]})

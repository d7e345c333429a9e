from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from spaceform import _kernels_nb as nbk
from spaceform import _kernels_np as npk
from spaceform.groups import commutator_subgroup_mask, consistent_presentations
from spaceform.lens import LensSpace

GROUPS = [G for G in consistent_presentations(90) if not G.is_cyclic]


@pytest.mark.parametrize("G", GROUPS[::3], ids=str)
def test_group_kernels_agree(G):
    k = G._k
    orders = npk.element_orders(*k)
    assert (nbk.element_orders(*k) == orders).all()
    gens = np.array([G.index(G.A), G.index(G.B)], dtype=np.int64)
    assert (nbk.closure(*k, gens) == npk.closure(*k, gens)).all()
    assert (nbk.index3_normal_cyclic(*k, orders) >= 0) == (npk.index3_normal_cyclic(*k, orders) >= 0)
    primes = np.array(G.primes, dtype=np.int64)
    for q in (2, 3):
        a = nbk.noncyclic_qp_witness(*k, orders, primes, q)
        b = npk.noncyclic_qp_witness(*k, orders, primes, q)
        assert (a[0] >= 0) == (b[0] >= 0)
    derived = commutator_subgroup_mask(G)
    a = nbk.spherical_witness(*k, orders, derived)
    b = npk.spherical_witness(*k, orders, derived)
    assert (a[0] >= 0) == (b[0] >= 0)


@pytest.mark.parametrize("L", [LensSpace(2, 1, 1), LensSpace(7, 1, 2), LensSpace(61, 1, 1)], ids=str)
def test_lens_kernels_agree(L):
    rng = np.random.default_rng(L.n)
    P = rng.standard_normal((6, 4))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    t = L.tables
    assert np.allclose(nbk.pair_distances(P, *t), npk.pair_distances(P, *t), atol=1e-12)
    for x, y in zip(P, P[::-1]):
        assert nbk.lens_cos(x, y, *t) == pytest.approx(float(npk.lens_cos(x, y, *t)), abs=1e-14)

    which = rng.integers(0, 6, size=400)
    noise = rng.standard_normal((400, 4))
    steps = np.geomspace(0.6, 1e-3, 400)
    polish = np.array([1e-2, 1e-3])
    A, B = P.copy(), P.copy()
    nbk.extent_ascent(A, *t, which, noise, steps, polish)
    npk.extent_ascent(B, *t, which, noise, steps, polish)
    iu = np.triu_indices(6, 1)
    assert nbk.pair_distances(A, *t)[iu].mean() == pytest.approx(npk.pair_distances(B, *t)[iu].mean(), abs=1e-6)


def test_maximin_kernels_agree():
    from spaceform.reps import _symmetric_parts, build_standard_rep

    S = _symmetric_parts(build_standard_rep(7, 9, 2, 3))
    rng = np.random.default_rng(5)
    x = rng.standard_normal(6)
    x /= np.linalg.norm(x)
    assert nbk.max_quadratic(S, x) == pytest.approx(npk.max_quadratic(S, x), abs=1e-12)
    noise = rng.standard_normal((500, 6))
    a = nbk.maximin_ascent(S, x.copy(), noise, 0.2, 1e-9)
    b = npk.maximin_ascent(S, x.copy(), noise, 0.2, 1e-9)
    assert a == pytest.approx(b, abs=1e-9)


@pytest.mark.parametrize("flag,backend", [("1", "numpy"), ("", "numba")])
def test_env_flag_selects_backend(flag, backend):
    env = dict(os.environ, SPACEFORM_DISABLE_NUMBA=flag)
    code = ("from spaceform.kernels import BACKEND; "
            "from spaceform.groups import MetacyclicPresentation as M, is_spherical_5_space_group as s; "
            "print(BACKEND, s(M(7, 9, 2)).verdict)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == [backend, "True"]

"""Time the numba kernels against their numpy fallbacks on representative inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Compilation happens once before timing; each figure is the best of --repeat runs.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from spaceform import _kernels_nb as nbk
from spaceform import _kernels_np as npk
from spaceform.groups import MetacyclicPresentation, commutator_subgroup_mask
from spaceform.lens import LensSpace
from spaceform.reps import _symmetric_parts, build_standard_rep


def cases():
    G = MetacyclicPresentation(37, 27, 10)
    k = G._k
    orders = npk.element_orders(*k)
    primes = np.array(G.primes, dtype=np.int64)
    derived = commutator_subgroup_mask(G)
    gens = np.array([G.index(G.A), G.index(G.B)], dtype=np.int64)

    L = LensSpace(61, 1, 11)
    rng = np.random.default_rng(0)
    P0 = rng.standard_normal((5, 4))
    P0 /= np.linalg.norm(P0, axis=1, keepdims=True)
    which = rng.integers(0, 5, size=3000)
    noise4 = rng.standard_normal((3000, 4))
    steps = np.geomspace(0.6, 1e-3, 3000)
    polish = np.array([1e-2, 1e-3, 1e-4, 1e-5])

    S = _symmetric_parts(build_standard_rep(7, 9, 2, 3))
    x0 = rng.standard_normal(6)
    x0 /= np.linalg.norm(x0)
    noise6 = rng.standard_normal((4000, 6))

    return {
        f"element_orders |G|={G.order}": lambda K: K.element_orders(*k),
        f"closure |G|={G.order}": lambda K: K.closure(*k, gens),
        f"index3_normal_cyclic |G|={G.order}": lambda K: K.index3_normal_cyclic(*k, orders),
        f"noncyclic_qp_witness q=3 |G|={G.order}": lambda K: K.noncyclic_qp_witness(*k, orders, primes, 3),
        f"spherical_witness |G|={G.order}": lambda K: K.spherical_witness(*k, orders, derived),
        "extent_ascent L(61;1,11) q=5, 3000 steps": lambda K: K.extent_ascent(
            P0.copy(), *L.tables, which, noise4, steps, polish),
        "maximin_ascent Gamma(7,9,2), 4000 steps": lambda K: K.maximin_ascent(
            S, x0.copy(), noise6, 0.2, 1e-9),
    }


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args()

    rows = []
    for name, call in cases().items():
        call(nbk)  # compile
        t_nb = best_of(lambda: call(nbk), args.repeat)
        t_np = best_of(lambda: call(npk), args.repeat)
        rows.append({"kernel": name, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb})

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['numba_s'] * 1e3:>8.2f}ms  {r['numpy_s'] * 1e3:>8.2f}ms"
              f"  {r['speedup']:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()

"""Command implementations shared by the CLI and report replay.

Each command maps (arguments, RunConfig) to a JSON payload and an optional
pass/fail verdict. Nothing here reads the clock except the report envelope.
"""
from __future__ import annotations

import math
from typing import Any, Callable

from . import groups, lens, reps, torus
from .reports import Report, RunConfig


class UsageError(ValueError):
    """Bad parameters; maps to exit status 2."""


Result = tuple[Any, "bool | None"]
COMMANDS: dict[str, Callable[[dict, RunConfig], Result]] = {}


def command(name: str):
    def wrap(fn):
        COMMANDS[name] = fn
        return fn
    return wrap


def execute(name: str, args: dict, config: RunConfig) -> Report:
    if name not in COMMANDS:
        raise UsageError(f"unknown command {name!r}")
    payload, passed = COMMANDS[name](dict(args), config)
    return Report.create(name, args, config, payload, passed)


def parse_weights(text: str) -> list[list[int]]:
    """'1,1,-2;1,-2,1' -> [[1, 1, -2], [1, -2, 1]]."""
    try:
        rows = [[int(v) for v in row.split(",")] for row in text.strip().split(";") if row.strip()]
    except ValueError:
        raise UsageError(f"weights must be integers: {text!r}") from None
    if not rows or any(len(r) != 3 for r in rows) or len(rows) > 3:
        raise UsageError("weights need 1-3 rows of exactly 3 integers")
    return rows


def parse_matrix(text: str) -> list[list[int]]:
    try:
        return [[int(v) for v in row.split(",")] for row in text.strip().split(";")]
    except ValueError:
        raise UsageError(f"matrix must be integers: {text!r}") from None


def _presentation(args: dict) -> groups.MetacyclicPresentation:
    try:
        return groups.validate_presentation(int(args["m"]), int(args["n"]), int(args["r"]))
    except groups.PresentationError as exc:
        raise UsageError(str(exc)) from None


def _lens(args: dict) -> lens.LensSpace:
    try:
        return lens.LensSpace(int(args["n"]), int(args.get("k", 1)), int(args.get("l", 1)))
    except lens.LensError as exc:
        raise UsageError(str(exc)) from None


def _q(args: dict) -> int:
    q = int(args["q"])
    if q < 2:
        raise UsageError("q must be >= 2")
    return q


# ----------------------------------------------------------------- groups


@command("groups.check")
def groups_check(args: dict, config: RunConfig) -> Result:
    G = _presentation(args)
    if G.order > config.order_cap:
        raise UsageError(f"|G| = {G.order} exceeds order_cap {config.order_cap}")
    return groups.group_report(G, config.order_cap), None


@command("groups.enumerate")
def groups_enumerate(args: dict, config: RunConfig) -> Result:
    N = int(args["max_order"])
    if not 1 <= N <= config.order_cap:
        raise UsageError(f"max_order must lie in [1, {config.order_cap}]")
    rows = groups.spherical_catalog(N)
    return {"max_order": N, "spherical": sum(r["spherical"] for r in rows),
            "columns": ["m", "n", "r", "order", "cyclic", "spherical", "witness"], "rows": rows}, None


@command("groups.harness")
def groups_harness(args: dict, config: RunConfig) -> Result:
    N = int(args["max_order"])
    if not 1 <= N <= config.order_cap:
        raise UsageError(f"max_order must lie in [1, {config.order_cap}]")
    rep = groups.spherical_criterion_harness(N, dedupe=bool(args.get("dedupe", True)))
    return rep.to_dict(), rep.ok


# ----------------------------------------------------------------- extent


@command("extent.bound")
def extent_bound(args: dict, config: RunConfig) -> Result:
    n, q = int(args["n"]), _q(args)
    if n < 2:
        raise UsageError("n must be >= 2")
    b = lens.extent_upper_bound(n, q)
    return {"n": n, "q": q, "alpha_q": lens.alpha_q(q), "bound": b,
            "margin_to_pi_over_3": math.pi / 3 - b, "below_pi_over_3": b < math.pi / 3}, None


@command("extent.optimize")
def extent_optimize(args: dict, config: RunConfig) -> Result:
    L, q = _lens(args), _q(args)
    params = lens.OptimizerParams(restarts=config.restarts, max_iters=config.max_iters,
                                  seed=config.seed)
    est = lens.optimize_extent(L, q, params)
    return est.to_dict(), est.lower_bound <= est.upper_bound + 1e-9


@command("extent.scan")
def extent_scan(args: dict, config: RunConfig) -> Result:
    q, lo, hi = _q(args), int(args["from"]), int(args["to"])
    try:
        scan = lens.scan_extent_bound(lo, hi, q)
    except lens.LensError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"n": r.n, "bound": r.bound, "verdict": r.verdict, "margin": r.margin} for r in scan.rows]
    verdict = scan.holds if q == 5 else None
    return {"q": q, "from": lo, "to": hi, "all_true": all(r.verdict for r in scan.rows),
            "holds_from_61": scan.holds, "columns": ["n", "bound", "verdict", "margin"],
            "rows": rows}, verdict


# ------------------------------------------------------------------ torus


@command("torus.analyze")
def torus_analyze(args: dict, config: RunConfig) -> Result:
    try:
        W = torus.WeightMatrix.of(args["weights"])
    except torus.TorusError as exc:
        raise UsageError(str(exc)) from None
    if not W.effective:
        return {"W": W.to_list(), "effective": False,
                "kernel_witness": list(W.kernel_witness())}, False
    out = torus.torus_report(W)
    if args.get("N") is not None:
        m = torus.cyclic_in_torus(W, int(args["N"]), args["angles"])
        out["cyclic"] = {"N": int(args["N"]), "angles": list(args["angles"]),
                         "member": m.member, "along_orbits": m.along_orbits,
                         # the same angles as residues of e^{aπi/N}, i.e. modulo 2N
                         "angles_mod_2N": [2 * a % (2 * int(args["N"])) for a in args["angles"]],
                         "witness": None if m.witness is None else [str(t) for t in m.witness]}
    sums = out["orbit_sum"]
    return out, None if sums is None else sums["holds"]


# -------------------------------------------------------------------- rep


def _standard_rep(args: dict) -> tuple[reps.LinearSpaceForm | None, dict, str | None]:
    m, n, r, c = (int(args[k]) for k in ("m", "n", "r", "c"))
    params = {"m": m, "n": n, "r": r, "c": c}
    _presentation(args)
    try:
        return reps.build_standard_rep(m, n, r, c), params, None
    except reps.RepresentationError as exc:
        return None, params, str(exc)


@command("rep.verify")
def rep_verify(args: dict, config: RunConfig) -> Result:
    rep, params, err = _standard_rep(args)
    if rep is None:
        return {"parameters": params, "relations_verified": False, "error": err}, False
    free = reps.is_free_representation(rep).free
    geometry = None
    if free:
        geometry = reps.injectivity_geometry(rep, restarts=min(config.restarts, 64),
                                             iters=config.max_iters, seed=config.seed)
    out = reps.rep_report(rep, params, geometry)
    if geometry is not None:
        out["collapse_ratio_at_least_pi2"] = geometry.collapse_ratio >= math.pi ** 2 - 1e-6
    return out, out["relations_verified"] and free


@command("rep.invariance")
def rep_invariance(args: dict, config: RunConfig) -> Result:
    rep, params, err = _standard_rep(args)
    if rep is None:
        return {"parameters": params, "relations_verified": False, "error": err}, False
    W = args["weights"]
    k = len(W)
    hol = {g: args.get(f"rho_{g}") or [[int(i == j) for j in range(k)] for i in range(k)]
           for g in ("A", "B")}
    for g, mat in hol.items():
        if len(mat) != k or any(len(row) != k for row in mat):
            raise UsageError(f"holonomy of {g} must be {k}x{k}")
    ok = reps.verify_pi1_invariance(rep, W, hol)
    return {"parameters": params, "weights": W, "holonomy": hol, "invariant": ok}, ok


# ------------------------------------------------------------- acceptance


@command("verify-all")
def verify_all(args: dict, config: RunConfig) -> Result:
    from .acceptance import run_all

    results = run_all(order_cap=config.order_cap, seed=config.seed, restarts=config.restarts,
                      max_iters=config.max_iters, a1_margin=float(args.get("a1_margin", 1e-6)))
    rows = [{"id": c.id, "passed": c.passed, "title": c.title} for c in results]
    return {"columns": ["id", "passed", "title"], "rows": rows, "details": {c.id: c.detail for c in results},
            "failed": [c.id for c in results if not c.passed]}, all(c.passed for c in results)

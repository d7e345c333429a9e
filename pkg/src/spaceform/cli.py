"""spaceform command-line interface.

Exit status: 0 success, 1 failed check or counterexample, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import groups, lens, reps, torus
from .kernels import BACKEND
from .commands import UsageError, execute, parse_matrix, parse_weights
from .reports import (OUTPUT_DIR_ENV, ConfigError, FORMATS, Report, RunConfig, read_config_file,
                      render, save)

log = logging.getLogger("spaceform")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--seed", type=int)
    g.add_argument("--restarts", type=int)
    g.add_argument("--max-iters", type=int, dest="max_iters")
    g.add_argument("--order-cap", type=int, dest="order_cap")
    g.add_argument("--format", choices=FORMATS, dest="output_format")
    g.add_argument("--output", dest="output_path", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spaceform", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="area", required=True, parser_class=_Parser)

    g = top.add_parser("groups", help="metacyclic group predicates").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = g.add_parser("check", help="predicate report for Gamma(m,n,r)")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    _common(p)
    for name in ("enumerate", "harness"):
        p = g.add_parser(name)
        p.add_argument("--max-order", type=int, required=True, dest="max_order")
        if name == "harness":
            p.add_argument("--no-dedupe", action="store_true")
        _common(p)

    e = top.add_parser("extent", help="lens-space extents").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = e.add_parser("bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=5)
    _common(p)
    p = e.add_parser("optimize")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--q", type=int, required=True)
    _common(p)
    p = e.add_parser("scan")
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--from", type=int, required=True, dest="n_from")
    p.add_argument("--to", type=int, required=True, dest="n_to")
    _common(p)

    t = top.add_parser("torus", help="linear torus actions").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = t.add_parser("analyze")
    p.add_argument("--weights", required=True, help='rows separated by ";", e.g. "1,1,-2;1,-2,1"')
    p.add_argument("--cyclic-order", type=int, dest="N")
    p.add_argument("--angles", help="three residues mod N, comma separated")
    _common(p)

    r = top.add_parser("rep", help="linear space-form representations").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    for name in ("verify", "invariance"):
        p = r.add_parser(name)
        for k in ("m", "n", "r"):
            p.add_argument(f"--{k}", type=int, required=True)
        p.add_argument("--c", type=int, default=3, help="bottom-block numerator")
        if name == "invariance":
            p.add_argument("--weights", required=True)
            p.add_argument("--rho-a", help='holonomy of A, e.g. "1,0;0,1"')
            p.add_argument("--rho-b", help='holonomy of B, e.g. "0,-1;1,-1"')
        _common(p)

    p = top.add_parser("verify-all", help="run the acceptance suite")
    p.add_argument("--a1-margin", type=float, default=1e-6,
                   help="margin required at n=61 (raise it for a negative control)")
    _common(p)

    p = top.add_parser("replay", help="re-run a saved report and compare payloads")
    p.add_argument("report")
    return parser


def _command(ns: argparse.Namespace) -> tuple[str, dict]:
    area, sub = ns.area, getattr(ns, "sub", None)
    if area == "groups" and sub == "check":
        return "groups.check", {"m": ns.m, "n": ns.n, "r": ns.r}
    if area == "groups":
        args = {"max_order": ns.max_order}
        if sub == "harness":
            args["dedupe"] = not ns.no_dedupe
        return f"groups.{sub}", args
    if area == "extent":
        if sub == "bound":
            return "extent.bound", {"n": ns.n, "q": ns.q}
        if sub == "optimize":
            return "extent.optimize", {"n": ns.n, "k": ns.k, "l": ns.l, "q": ns.q}
        return "extent.scan", {"q": ns.q, "from": ns.n_from, "to": ns.n_to}
    if area == "torus":
        args = {"weights": parse_weights(ns.weights)}
        if ns.N is not None:
            if ns.angles is None:
                raise UsageError("--cyclic-order needs --angles")
            try:
                args.update(N=ns.N, angles=[int(a) for a in ns.angles.split(",")])
            except ValueError:
                raise UsageError("angles must be integers") from None
            if len(args["angles"]) != 3 or ns.N < 1:
                raise UsageError("need N >= 1 and three angles")
        return "torus.analyze", args
    if area == "rep":
        args = {"m": ns.m, "n": ns.n, "r": ns.r, "c": ns.c}
        if sub == "invariance":
            args["weights"] = parse_weights(ns.weights)
            if ns.rho_a:
                args["rho_A"] = parse_matrix(ns.rho_a)
            if ns.rho_b:
                args["rho_B"] = parse_matrix(ns.rho_b)
        return f"rep.{sub}", args
    return "verify-all", {"a1_margin": ns.a1_margin}


def _config(ns: argparse.Namespace) -> RunConfig:
    base = RunConfig()
    if getattr(ns, "config", None):
        base = RunConfig.from_mapping(read_config_file(ns.config))
    flags = {k: getattr(ns, k, None) for k in
             ("seed", "restarts", "max_iters", "order_cap", "output_format", "output_path")}
    return base.merged(flags)


MATRIX_FILE = "acceptance-matrix.json"


def persist_matrix(report: Report) -> Path:
    """Write the verify-all pass/fail matrix next to the other reports (or into the cwd)."""
    target = Path(os.environ.get(OUTPUT_DIR_ENV) or ".") / MATRIX_FILE
    target.parent.mkdir(parents=True, exist_ok=True)
    p = report.payload
    matrix = {"passed": report.passed, "failed": p["failed"], "config": report.config.to_dict(),
              "criteria": [dict(row, detail=p["details"][row["id"]]) for row in p["rows"]]}
    target.write_text(json.dumps(matrix, indent=2, sort_keys=True) + "\n")
    return target


def _replay(path: str) -> int:
    saved = Report.from_json(Path(path).read_text())
    if saved.backend != BACKEND:
        log.warning("report made with the %s backend, replaying with %s",
                    saved.backend, BACKEND)
    again = execute(saved.command, saved.arguments, saved.config)
    same = again.payload_json() == saved.payload_json()
    print(json.dumps({"command": saved.command, "identical": same}))
    return 0 if same else 1


DOMAIN_ERRORS = (ConfigError, groups.PresentationError, groups.OrderCapError,
                 lens.LensError, torus.TorusError, reps.RepresentationError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if ns.area == "replay":
            return _replay(ns.report)
        name, args = _command(ns)
        config = _config(ns)
        report = execute(name, args, config)
    except (UsageError, *DOMAIN_ERRORS) as exc:
        print(f"spaceform: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"spaceform: error: {exc}", file=sys.stderr)
        return 2
    print(render(report, config.output_format))
    written = save(report, config.output_path)
    if written:
        log.info("report written to %s", written)
    if name == "verify-all":
        log.info("acceptance matrix written to %s", persist_matrix(report))
    return 1 if report.passed is False else 0


if __name__ == "__main__":
    sys.exit(main())

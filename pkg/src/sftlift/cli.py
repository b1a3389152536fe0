"""Command-line front end.

Exit codes: 0 success, 2 refusal (a stated precondition fails for the
input), 1 internal error.  All randomized subcommands record their seed in
the output, and identical configuration plus inputs produce byte-identical
JSON (keys sorted, orderings canonical).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import ca as ca_mod
from .codes import compute_degree, is_finite_to_one
from .errors import InfiniteToOne, PreconditionError
from .fibers import MonteCarloParams, analyze_periodic_lifts, classify_lifts_monte_carlo
from .graphs import (OneBlockRecoding, analyze_graph, determinize, entropy,
                     load_graph_or_code, render_symbol, to_dot)
from .joinings import degree_joining_graph
from .measures import measure_from_json_dict


@dataclass
class RunConfig:
    command: str
    inputs: tuple = ()
    sample_length: int = 10**6
    cylinder_depth: int = 3
    tolerance: float | None = None
    seed: int = 0
    max_period: int = 6
    fmt: str = "json"

    @property
    def tau(self):
        if self.tolerance is not None:
            return self.tolerance
        return 5.0 / math.sqrt(self.sample_length)

    def mc_params(self):
        return MonteCarloParams(self.sample_length, self.cylinder_depth,
                                self.tolerance, self.seed)


def _emit(payload, fmt="json"):
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(payload if isinstance(payload, str) else str(payload))
        if not str(payload).endswith("\n"):
            sys.stdout.write("\n")


def _load_code(path):
    code, block_code = load_graph_or_code(path)
    if isinstance(code, OneBlockRecoding):
        return code.graph, code, block_code
    return code, None, None


def cmd_analyze(config: RunConfig):
    g, _rec, _block = _load_code(config.inputs[0])
    report = analyze_graph(g)
    out = {
        "is_essential": report.is_essential,
        "trimmed_symbols": [render_symbol(s) for s in report.trimmed_symbols],
        "components": [[render_symbol(s) for s in comp] for comp in report.components],
        "is_irreducible": report.is_irreducible,
        "periods": list(report.periods),
        "entropy_x": None,
        "entropy_y": None,
        "finite_to_one": None,
    }
    if report.is_irreducible:
        out["entropy_x"] = entropy(report.essential)
        out["entropy_y"] = determinize(report.essential).entropy()
        out["finite_to_one"] = is_finite_to_one(report.essential)
    _emit(out)
    return 0


def cmd_degree(config: RunConfig):
    g, _rec, _block = _load_code(config.inputs[0])
    try:
        report = compute_degree(g)
    except InfiniteToOne as exc:
        if exc.report is not None:
            _emit(exc.report.to_json_dict())
        raise
    _emit(report.to_json_dict())
    return 0


def cmd_joining(config: RunConfig):
    g, _rec, _block = _load_code(config.inputs[0])
    lam = degree_joining_graph(g)
    if config.fmt == "dot":
        _emit(to_dot(lam.graph), fmt="dot")
        return 0
    out = lam.graph.to_json_dict()
    out["degree"] = lam.degree
    out["components"] = [[render_symbol(s) for s in comp] for comp in lam.components]
    _emit(out)
    return 0


def cmd_periodic_lifts(config: RunConfig):
    g, rec, _block = _load_code(config.inputs[0])
    if not is_finite_to_one(g):
        raise InfiniteToOne("periodic lift analysis requires a finite-to-one code")
    code = rec if rec is not None else g
    rows = []
    for orbit in determinize(g).periodic_orbits(config.max_period):
        report, decomposition = analyze_periodic_lifts(code, orbit)
        rows.append({
            "orbit": [str(a) for a in orbit.primitive_word],
            "period": orbit.period,
            "fiber_size": report.degree,
            "lifts": [entry.to_json_dict() for entry in report.lifts],
            "canonical_lift": decomposition.to_json_dict(),
        })
    if config.fmt == "table":
        lines = []
        for row in rows:
            lifts = ", ".join(
                f"{','.join(e['measure']['orbit'])} (mult {e['multiplicity']})"
                for e in row["lifts"])
            lines.append(f"orbit {','.join(row['orbit'])} (period {row['period']}): "
                         f"fiber {row['fiber_size']}; lifts: {lifts}")
        _emit("\n".join(lines), fmt="table")
        return 0
    _emit({"max_period": config.max_period, "orbits": rows})
    return 0


def cmd_lift_mc(config: RunConfig, measure_path, constant_to_one=False):
    g, rec, block = _load_code(config.inputs[0])
    with open(measure_path) as fh:
        data = json.load(fh)
    push_code = block if block is not None else g
    nu = measure_from_json_dict(data, code=push_code)
    code = rec if rec is not None else g
    report = classify_lifts_monte_carlo(code, nu, config.mc_params(),
                                        constant_to_one=constant_to_one)
    _emit(report.to_json_dict())
    return 0


def cmd_ca(config: RunConfig, family, modulus, vector, skip_mc):
    family = {"diff": "difference", "difference": "difference", "sum": "sum"}[family]
    code = ca_mod.LinearCACode(modulus, family)
    alpha = [a.strip() for a in vector.split(",")]
    exact = ca_mod.exact_lift_analysis(code, alpha)
    out = {"code": code.describe(), "exact": exact.to_json_dict()}
    if not skip_mc:
        validation = ca_mod.cross_validate(code, alpha, config.mc_params())
        out["cross_validation"] = validation.to_json_dict()
    _emit(out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sftlift",
        description="finite-to-one factor codes on SFTs: degrees, joinings, measure fibers")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="graph or sliding-block-code JSON file")
        p.add_argument("--format", choices=["json", "table", "dot"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--length", type=int, default=10**6,
                       help="Monte-Carlo sample length T")
        p.add_argument("--cyl-depth", type=int, default=3,
                       help="cylinder depth L for empirical statistics")
        p.add_argument("--tolerance", type=float, default=None,
                       help="clustering tolerance (default 5/sqrt(T))")
        p.add_argument("--max-period", type=int, default=6)

    common(sub.add_parser("analyze", help="structure report and entropies"))
    common(sub.add_parser("degree", help="finite-to-one verdict and degree"))
    common(sub.add_parser("joining", help="export the degree joining graph"))
    common(sub.add_parser("periodic-lifts", help="exact lifts of all short periodic orbits"))

    mc = sub.add_parser("lift-mc", help="Monte-Carlo lift classification")
    common(mc)
    mc.add_argument("--measure", required=True, help="image-measure JSON file")
    mc.add_argument("--constant-to-one", action="store_true",
                    help="assert the code is constant-to-one, allowing "
                         "non-fully-supported image measures")

    ca_p = sub.add_parser("ca", help="exact linear-CA analyzers plus cross-validation")
    common(ca_p, with_input=False)
    ca_p.add_argument("--family", required=True, choices=["diff", "difference", "sum"])
    ca_p.add_argument("--modulus", type=int, required=True)
    ca_p.add_argument("--vector", required=True,
                      help="comma-separated exact rationals, e.g. 1/8,3/8,1/8,3/8")
    ca_p.add_argument("--skip-mc", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(
        command=args.command,
        inputs=(getattr(args, "input", None),),
        sample_length=args.length,
        cylinder_depth=args.cyl_depth,
        tolerance=args.tolerance,
        seed=args.seed,
        max_period=args.max_period,
        fmt=args.format,
    )
    try:
        if args.command == "analyze":
            return cmd_analyze(config)
        if args.command == "degree":
            return cmd_degree(config)
        if args.command == "joining":
            return cmd_joining(config)
        if args.command == "periodic-lifts":
            return cmd_periodic_lifts(config)
        if args.command == "lift-mc":
            return cmd_lift_mc(config, args.measure, args.constant_to_one)
        if args.command == "ca":
            return cmd_ca(config, args.family, args.modulus, args.vector, args.skip_mc)
        raise ValueError(f"unknown command {args.command!r}")
    except PreconditionError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

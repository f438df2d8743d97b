"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 numerical non-convergence,
3 invalid input, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bounds
from .canonical import DEFAULT_TOL, canonical_gate, decompose, weyl_reduce
from .errors import GateError, NotUnitary, NumericalFailure
from .gates import InvalidGateSpec, matrix_to_doc, parse_angle, resolve_gate
from .invariants import makhlin
from .numkernel import random_source
from .synth import SynthesisProblem, synthesize

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3, 4


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _angle(x: float, degrees: bool):
    v = math.degrees(x) if degrees else x
    return float(f"{v:.12g}")


def _vector(c, degrees: bool) -> list[float]:
    return [_angle(float(x), degrees) for x in c]


def _budget(value):
    return str(value) if value is bounds.UNBOUNDED else int(value)


def _gate(spec: str, tol: float) -> np.ndarray:
    try:
        u = resolve_gate(spec)
    except InvalidGateSpec as exc:
        raise CommandError(str(exc), EXIT_INPUT) from exc
    except OSError as exc:
        raise CommandError(f"cannot read {spec}: {exc}", EXIT_IO) from exc
    return u


def _decompose(u: np.ndarray, tol: float):
    try:
        return decompose(u, tol)
    except NotUnitary as exc:
        raise CommandError(str(exc), EXIT_INPUT) from exc
    except NumericalFailure as exc:
        raise CommandError(str(exc), EXIT_NUMERIC) from exc


def cmd_decompose(args) -> tuple[dict, int]:
    dec = _decompose(_gate(args.gate, args.tol), args.tol)
    doc = {
        "gate": args.gate,
        "canonical": _vector(dec.canonical, args.degrees),
        "global_phase": _angle(dec.global_phase, args.degrees),
        "residual": dec.residual,
        "post_a": matrix_to_doc(dec.post_a)["rows"],
        "post_b": matrix_to_doc(dec.post_b)["rows"],
        "pre_a": matrix_to_doc(dec.pre_a)["rows"],
        "pre_b": matrix_to_doc(dec.pre_b)["rows"],
    }
    return doc, EXIT_NUMERIC if dec.residual > args.tol else EXIT_OK


def cmd_invariants(args) -> tuple[dict, int]:
    u = _gate(args.gate, args.tol)
    try:
        g = makhlin(u, args.tol)
    except NotUnitary as exc:
        raise CommandError(str(exc), EXIT_INPUT) from exc
    return {"gate": args.gate, "g1": [g.g1.real, g.g1.imag], "g2": g.g2}, EXIT_OK


def cmd_classify(args) -> tuple[dict, int]:
    dec = _decompose(_gate(args.gate, args.tol), args.tol)
    gc = bounds.classify(dec.canonical, args.tol)
    return {
        "gate": args.gate,
        "canonical": _vector(gc.canonical, args.degrees),
        "is_local": gc.is_local,
        "is_swap_class": gc.is_swap_class,
        "perfect_entangler": gc.is_perfect_entangler,
        "controlled_u": gc.is_controlled_u,
        "b_class": gc.is_b_class,
        "corollary6": gc.satisfies_corollary6,
    }, EXIT_OK


def cmd_minapps(args) -> tuple[dict, int]:
    if args.n_max < 1:
        raise CommandError("--n-max must be positive", EXIT_INPUT)
    dec = _decompose(_gate(args.gate, args.tol), args.tol)
    budget = bounds.application_budget(dec.canonical, args.n_max)
    return {
        "gate": args.gate,
        "canonical": _vector(dec.canonical, args.degrees),
        "power": _angle(budget.power, args.degrees),
        "min_applications": _budget(budget.min_applications),
        "theorem4": {str(n): ok for n, ok in enumerate(budget.per_n_feasible, start=1)},
    }, EXIT_OK


def cmd_dual(args) -> tuple[dict, int]:
    dec = _decompose(_gate(args.gate, args.tol), args.tol)
    return {
        "gate": args.gate,
        "canonical": _vector(dec.canonical, args.degrees),
        "dual": _vector(bounds.dual_gate(dec.canonical), args.degrees),
    }, EXIT_OK


def cmd_synth(args) -> tuple[dict, int]:
    if args.applications < 1 or args.restarts < 1:
        raise CommandError("-n and --restarts must be positive", EXIT_INPUT)
    e = _gate(args.elementary, args.tol)
    t = _gate(args.target, args.tol)
    try:
        res = synthesize(
            SynthesisProblem(
                e, t, args.applications,
                restarts=args.restarts,
                max_iterations=args.max_iterations,
                objective_tolerance=args.objective_tol,
                seed=args.seed,
            )
        )
    except NotUnitary as exc:
        raise CommandError(str(exc), EXIT_INPUT) from exc
    doc = {
        "elementary": args.elementary,
        "target": args.target,
        "applications": args.applications,
        "converged": res.converged,
        "residual": res.residual,
        "invariant_residual": res.invariant_residual,
        "iterations_used": res.iterations_used,
        "best_restart": res.best_restart,
        "locals": [
            {"a": matrix_to_doc(a, f"a{j}"), "b": matrix_to_doc(b, f"b{j}")}
            for j, (a, b) in enumerate(res.locals)
        ],
    }
    return doc, EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_check_t7(args) -> tuple[dict, int]:
    try:
        vals = [parse_angle(x) for x in (args.gamma1, args.gamma2, args.c1, args.c2)]
        s1, s2 = bounds.theorem7_slacks(*vals)
    except (InvalidGateSpec, bounds.DomainError) as exc:
        raise CommandError(str(exc), EXIT_INPUT) from exc
    ok = s1 >= -bounds.INEQ_TOL and s2 >= -bounds.INEQ_TOL
    return {
        "gamma1": _angle(vals[0], args.degrees),
        "gamma2": _angle(vals[1], args.degrees),
        "c1": _angle(vals[2], args.degrees),
        "c2": _angle(vals[3], args.degrees),
        "verdict": "pass" if ok else "fail",
        "sum_slack": _angle(s1, args.degrees),
        "difference_slack": _angle(s2, args.degrees),
    }, EXIT_OK


def cmd_volume(args) -> tuple[dict, int]:
    if args.samples <= 0:
        raise CommandError("--samples must be positive", EXIT_INPUT)
    rf = bounds.region_fractions(bounds.sample_chamber(random_source(args.seed), args.samples))
    return {"seed": args.seed, **rf._asdict()}, EXIT_OK


def chamber_grid(grid_step: float, mirror: bool = False) -> tuple[float, np.ndarray]:
    """Grid over ``pi/4 >= c1 >= c2 >= c3 >= 0`` (``|c3|`` with ``mirror``).

    The spacing is pi/4 divided by the smallest integer giving a spacing no
    larger than ``grid_step``, so the tetrahedron's vertices are grid points.
    """
    steps = math.ceil(bounds.QUARTER_PI / grid_step - 1e-9)
    h = bounds.QUARTER_PI / steps
    idx = [
        (i, j, k)
        for i in range(steps + 1)
        for j in range(i + 1)
        for k in range(-j if mirror else 0, j + 1)
    ]
    return h, np.array(idx, dtype=float) * h


def cmd_export_chamber(args) -> tuple[dict, int]:
    if not 0 < args.grid_step <= np.pi / 16 + 1e-15:
        raise CommandError("--grid-step must lie in (0, pi/16]", EXIT_INPUT)
    h, pts = chamber_grid(args.grid_step, args.mirror)
    pe = bounds.is_perfect_entangler(pts)
    cor6 = bounds.corollary6_holds(pts)
    power = bounds.power_measure(pts)
    lines = ["c1,c2,c3,is_pe,corollary6,P"]
    for c, a, b, p in zip(pts, pe, cor6, power):
        lines.append(
            f"{c[0]:.17g},{c[1]:.17g},{c[2]:.17g},{str(bool(a)).lower()},{str(bool(b)).lower()},{p:.17g}"
        )
    try:
        with open(args.out, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CommandError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    return {"path": args.out, "rows": len(pts), "grid_step": h, "mirror": args.mirror}, EXIT_OK


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="emit a JSON document")
    p.add_argument("--degrees", action="store_true", help="display angles in degrees")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gatebudget", description="Two-qubit gate decomposition and application budgets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    gate_help = "registry name, canonical:c1,c2,c3, random:SEED or matrix file"

    for name, func, helptext in (
        ("decompose", cmd_decompose, "canonical decomposition"),
        ("invariants", cmd_invariants, "Makhlin invariants"),
        ("classify", cmd_classify, "gate classification"),
        ("dual", cmd_dual, "dual gate class"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("gate", help=gate_help)
        p.set_defaults(func=func)

    p = sub.add_parser("minapps", parents=[common], help="application budget")
    p.add_argument("gate", help=gate_help)
    p.add_argument("--n-max", type=int, default=8)
    p.set_defaults(func=cmd_minapps)

    p = sub.add_parser("synth", parents=[common], help="search local interleavings")
    p.add_argument("--elementary", required=True, help=gate_help)
    p.add_argument("--target", required=True, help=gate_help)
    p.add_argument("-n", "--applications", type=int, required=True)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--objective-tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check-t7", parents=[common], help="controlled-U composition test")
    for arg in ("gamma1", "gamma2", "c1", "c2"):
        p.add_argument(arg)
    p.set_defaults(func=cmd_check_t7)

    p = sub.add_parser("volume", parents=[common], help="Monte Carlo chamber fractions")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("export-chamber", parents=[common], help="write the chamber grid table")
    p.add_argument("--grid-step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mirror", action="store_true", help="include the c3 < 0 half")
    p.set_defaults(func=cmd_export_chamber)
    return parser


def _format_text(doc: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in doc.items():
        if isinstance(value, dict):
            lines.extend(_format_text(value, f"{prefix}{key}."))
        else:
            lines.append(f"{prefix}{key}: {json.dumps(value)}")
    return lines


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit EXIT_USAGE
        return int(exc.code or 0)
    try:
        doc, code = args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except GateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps(doc, indent=1))
    else:
        print("\n".join(_format_text(doc)))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""``qcu`` command-line front end.

Every subcommand prints JSON (or CSV for ``curve`` and ``table``) to stdout
or to ``--out``. Exit status: 0 on success, 1 for invalid input, 2 when a
numerical procedure fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import qmat
from .errors import NumericalError, QcuError, ValidationError

TABLE_ROWS = (
    (0.0, 0.0, 0.0),
    (math.pi / 8, math.pi / 2, 0.0),
    (math.pi / 4, 0.0, math.pi / 2),
    (math.pi / 2, math.pi / 2, math.pi / 2),
    (3 * math.pi / 4, math.pi / 2, 0.0),
    (math.pi, 0.0, math.pi / 2),
)
"""Experimental settings as (phi, theta, alpha)."""


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_matrix(ref: str) -> np.ndarray:
    """``@path.json`` reads a file; anything else is parsed as inline JSON."""
    if ref.startswith("@"):
        path = Path(ref[1:])
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read matrix file {path}: {exc.strerror}") from None
    else:
        text = ref
    return qmat.matrix_from_json(text)


def _angle(args, value):
    return math.radians(value) if args.deg else value


def _emit(args, payload):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2 if args.pretty else None)
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _optimizer_opts(args):
    from .optics import OptimizerOptions

    return OptimizerOptions(restarts=args.restarts, seed=args.seed,
                            max_iter=args.max_iter, penalty=args.penalty)


# --- subcommands ------------------------------------------------------------


def cmd_decompose(args):
    from .synth import zyz_decompose

    return zyz_decompose(_load_matrix(args.unitary)).to_dict()


def cmd_map(args):
    from .synth import CUParams, cu_to_zyz

    p = CUParams(alpha=_angle(args, args.alpha), theta=_angle(args, args.theta), phi=_angle(args, args.phi))
    return cu_to_zyz(p).to_dict()


def cmd_inverse_map(args):
    from .synth import ZYZParams, zyz_to_cu

    z = ZYZParams(gamma=_angle(args, args.gamma), omega=_angle(args, args.omega),
                  delta=_angle(args, args.delta), global_phase=_angle(args, args.global_phase))
    return zyz_to_cu(z).to_dict()


def cmd_assemble(args):
    from .synth import assemble_plan, synthesize_controlled_u

    plan = synthesize_controlled_u(_load_matrix(args.unitary))
    return {**plan.to_dict(), "gate": qmat.matrix_to_dict(assemble_plan(plan))}


def cmd_optimize(args):
    from .optics import optimize_cphase

    return optimize_cphase(_angle(args, args.phi), _optimizer_opts(args)).to_dict()


def cmd_curve(args):
    from .optics import midpoint_grid, success_curve

    grid = [_angle(args, p) for p in args.phis] if args.phis else midpoint_grid(args.points)
    curve = success_curve(grid, _optimizer_opts(args))
    if args.pretty:
        sys.stderr.write(f"min={curve.minimum:.6f} mean={curve.mean:.6f} failed={len(curve.failures)}\n")
    return curve.to_csv()


def cmd_ncu(args):
    from .multictrl import build_ncu, verify_ncu

    v = _load_matrix(args.v) if args.v else None
    theta = _angle(args, args.theta)
    circuit = build_ncu(args.n, theta, v)
    check = verify_ncu(circuit, args.n, theta, v)
    return {"circuit": circuit.to_dict(), "deviation": check.deviation, "leakage": check.leakage}


def cmd_resources(args):
    from .multictrl import resource_report

    rep = resource_report(args.n, _angle(args, args.phi), args.p_cnot, args.p_cphase)
    return rep.to_dict()


def cmd_tomo(args):
    from .tomo import reconstruct_ml, score, simulate_tomography

    u = _load_matrix(args.unitary)
    tomogram = simulate_tomography(u, args.shots, args.noise, args.seed)
    estimate = reconstruct_ml(tomogram)
    s = score(estimate, u)
    return {"tomogram": tomogram.to_dict(), "choi": estimate.to_dict(),
            "fidelity": s.fidelity, "purity": s.purity}


def cmd_table(args):
    from .synth import CUParams
    from .tomo import table_report

    rows = [CUParams(alpha=a, theta=t, phi=p) for p, t, a in TABLE_ROWS]
    report = table_report(rows, args.shots, args.noise, args.seed, optimizer_opts=_optimizer_opts(args))
    return report.to_dict() if args.json else report.to_csv()


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="indent JSON output")
    common.add_argument("--deg", action="store_true", help="angles are given in degrees")

    stochastic = _Parser(add_help=False)
    stochastic.add_argument("--seed", type=int, default=0)

    optimizer = _Parser(add_help=False)
    optimizer.add_argument("--restarts", type=int, default=64)
    optimizer.add_argument("--max-iter", type=int, default=300)
    optimizer.add_argument("--penalty", type=float, default=1e3)

    parser = _Parser(prog="qcu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", parents=[common], help="ZYZ angles of a 2x2 unitary")
    p.add_argument("--unitary", required=True, help="@file.json or inline matrix JSON")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("map", parents=[common], help="(phi, theta, alpha) -> (omega, gamma, delta)")
    for name in ("phi", "theta", "alpha"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("inverse-map", parents=[common], help="(omega, gamma, delta) -> (phi, theta, alpha)")
    for name in ("omega", "gamma", "delta"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--global-phase", type=float, default=0.0)
    p.set_defaults(func=cmd_inverse_map)

    p = sub.add_parser("assemble", parents=[common], help="plan and assemble a controlled-U")
    p.add_argument("--unitary", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("optimize", parents=[common, stochastic, optimizer],
                       help="optimal c-phase success probability")
    p.add_argument("--phi", type=float, required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("curve", parents=[common, stochastic, optimizer], help="success probability curve (CSV)")
    p.add_argument("--points", type=int, default=64, help="midpoint grid size on (0, 2pi)")
    p.add_argument("--phis", type=float, nargs="+", help="explicit grid instead of --points")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("ncu", parents=[common], help="build and verify an n-controlled U circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--v", help="optional 2x2 unitary V (@file.json)")
    p.set_defaults(func=cmd_ncu)

    p = sub.add_parser("resources", parents=[common], help="gate counts and success probabilities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--p-cnot", type=float, default=1.0 / 9.0)
    p.add_argument("--p-cphase", type=float, required=True)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("tomo", parents=[common, stochastic], help="simulated process tomography")
    p.add_argument("--unitary", required=True)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--noise", default="none", help="none | poisson | depolarizing=S[,poisson]")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("table", parents=[common, stochastic, optimizer],
                       help="synthetic report for the six experimental settings (CSV)")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--noise", default="none")
    p.add_argument("--json", action="store_true", help="JSON including Choi matrices instead of CSV")
    p.set_defaults(func=cmd_table)

    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _emit(args, args.func(args))
    except NumericalError as exc:
        sys.stderr.write(f"qcu: numerical failure: {exc}\n")
        return 2
    except (QcuError, ValueError, KeyError) as exc:
        sys.stderr.write(f"qcu: error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

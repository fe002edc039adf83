"""Command line entry point.

Subcommands map one-to-one onto the driver's table builders plus the
production ``solve``.  Exit codes: 0 on success with every iteration
converged, 2 when results were produced but some point missed its
tolerance, 1 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .driver import (
    RunConfig,
    emit_cg_table,
    emit_history,
    emit_iterations_table,
    emit_quad_table,
    emit_richardson_table,
    solve_parabolic,
    write_rows,
)
from .errors import ContourHeatError


def _add_common(parser: argparse.ArgumentParser, mesh: bool = True) -> None:
    parser.add_argument("--q", type=int, default=20, help="contour parameter; 2q+1 nodes")
    parser.add_argument(
        "--t", type=float, action="append", default=None, metavar="T",
        help="evaluation time, repeatable (default 1.0)",
    )
    parser.add_argument("--delta", type=float, default=1e-5, help="total error budget")
    parser.add_argument(
        "--lambda1", type=float, default=None,
        help="override the smallest pencil eigenvalue",
    )
    parser.add_argument(
        "--lambdaN", dest="lambda_n", type=float, default=None,
        help="override the largest pencil eigenvalue",
    )
    parser.add_argument("--out", default="-", help="output path, - for stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    if mesh:
        parser.add_argument("--mesh-m", type=int, default=40, help="structured mesh refinement")
        parser.add_argument(
            "--mesh-files", nargs=2, metavar=("NODE", "ELE"), default=None,
            help="read the mesh from Triangle-format files",
        )
        parser.add_argument("--a", type=float, default=1.0 / 15.0, help="diffusivity")
        parser.add_argument(
            "--method", choices=("cg", "richardson", "direct"), default="cg"
        )
        parser.add_argument(
            "--precond", default="inv",
            help="none, inv, ic0 or sgs:k (default inv)",
        )
        parser.add_argument("--mu", default="auto", help="shift; 'auto' or a number")
        parser.add_argument("--lumped", action="store_true", help="lump the mass matrix")
        parser.add_argument(
            "--no-warm-start", dest="warm_start", action="store_false",
            help="start every point from zero",
        )
        parser.add_argument("--threads", type=int, default=1)
        parser.add_argument("--max-iterations", type=int, default=5000)
        parser.add_argument("--seed", type=int, default=0)


def _config(args: argparse.Namespace) -> RunConfig:
    fields = dict(
        q=args.q,
        t_values=tuple(args.t) if args.t else (1.0,),
        delta=args.delta,
        lambda1=args.lambda1,
        lambda_n=args.lambda_n,
    )
    if hasattr(args, "mesh_m"):
        fields.update(
            mesh_m=args.mesh_m,
            mesh_files=tuple(args.mesh_files) if args.mesh_files else None,
            a=args.a,
            method=args.method,
            precond=args.precond,
            mu=args.mu,
            lumped=args.lumped,
            warm_start=args.warm_start,
            threads=args.threads,
            max_iterations=args.max_iterations,
            seed=args.seed,
        )
    return RunConfig(**fields)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contourheat",
        description="Contour-quadrature time discretization of the model "
        "heat problem with shifted-system iterations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quad-table", help="quadrature nodes and tolerances")
    _add_common(p, mesh=False)

    p = sub.add_parser("richardson-table", help="acceleration parameters per node")
    _add_common(p)

    p = sub.add_parser("cg-table", help="CG per-step factors and optimal shifts")
    _add_common(p)

    p = sub.add_parser("iterations-table", help="iteration counts per node")
    _add_common(p)

    p = sub.add_parser("solve", help="solve and evaluate U(t)")
    _add_common(p)

    p = sub.add_parser("history", help="per-iteration measure at one node")
    _add_common(p)
    p.add_argument("--j", type=int, required=True, help="node index, 0..q")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        code = 0
        if args.command == "quad-table":
            table = emit_quad_table(cfg)
        elif args.command == "richardson-table":
            table = emit_richardson_table(cfg)
        elif args.command == "cg-table":
            table = emit_cg_table(cfg)
        elif args.command == "iterations-table":
            table = emit_iterations_table(cfg)
            if table[2]["non_converged"]:
                code = 2
        elif args.command == "history":
            table = emit_history(cfg, args.j)
            if not table[2]["converged"]:
                code = 2
        else:
            result = solve_parabolic(cfg)
            columns = ["t", "u_norm", "error"]
            rows = [[t, result.u_norms[t], result.errors[t]] for t in cfg.t_values]
            meta = {
                "q": cfg.q,
                "delta": cfg.delta,
                "method": cfg.method,
                "precond": cfg.precond,
                "points": [
                    {
                        "j": r.j,
                        "iterations": r.iterations,
                        "converged": r.converged,
                        "norm_w": r.norm_w,
                        "tolerance": r.tolerance,
                    }
                    for r in result.records
                ],
            }
            table = (columns, rows, meta)
            print(
                f"solved {len(result.records)} points, "
                f"{result.total_iterations} iterations total, "
                f"converged {sum(r.converged for r in result.records)}"
                f"/{len(result.records)}",
                file=sys.stderr,
            )
            if not result.all_converged:
                code = 2
        write_rows(args.out, args.format, *table)
        return code
    except ContourHeatError as exc:
        print(f"contourheat: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Convergence histories of the shifted-system iterations at one node.

Runs each requested method/preconditioner pair cold on the same system
(z_j M + S) w = g and writes the per-iteration stopping measures to one
CSV (columns padded with blanks after convergence).  With --plot, also
renders the histories on a log scale.
"""

import argparse
import csv
import sys

from contourheat.driver import RunConfig, Workspace, solve_point

PAIRS = (
    ("cg", "none"),
    ("cg", "inv"),
    ("cg", "ic0"),
    ("richardson", "inv"),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=int, default=20)
    parser.add_argument("--mesh-m", type=int, default=40)
    parser.add_argument("--j", type=int, default=10)
    parser.add_argument("--delta", type=float, default=1e-5)
    parser.add_argument("--out", default="history.csv")
    parser.add_argument("--plot", default=None, metavar="PNG")
    args = parser.parse_args()

    cfg = RunConfig(q=args.q, mesh_m=args.mesh_m, delta=args.delta)
    ws = Workspace(cfg)
    tolerance = ws.budget.tol(args.j, cfg.q)
    histories = {}
    for method, precond in PAIRS:
        rep = solve_point(ws, args.j, tolerance, method=method, precond=precond)
        histories[f"{method}_{precond}"] = rep.history
        print(
            f"{method}+{precond}: {rep.iterations} iterations, "
            f"converged={rep.converged}",
            file=sys.stderr,
        )

    names = list(histories)
    depth = max(len(h) for h in histories.values())
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n"] + names)
        for n in range(depth):
            row = [n] + [
                f"{h[n]:.12g}" if n < len(h) else "" for h in histories.values()
            ]
            writer.writerow(row)
    print(f"wrote {args.out}", file=sys.stderr)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, h in histories.items():
            ax.semilogy(range(len(h)), h, label=name)
        ax.axhline(tolerance, color="gray", linestyle=":", label="tolerance")
        ax.set_xlabel("iteration")
        ax.set_ylabel("stopping measure")
        ax.set_title(f"node j={args.j}, z={ws.quad.node(args.j):.3g}")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"wrote {args.plot}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

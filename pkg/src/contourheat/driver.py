"""End-to-end solves of the model problem and tabular report export.

The pipeline: assemble the FEM space, build the contour quadrature for
the requested q, solve (z_j M + S) w_j = g(z_j) for j = 0..q with the
configured iteration (negative indices follow by conjugation), then
synthesize U(t) for every requested t and compare with the known exact
solution of the model problem.

Production solves stop on the computable residual bound (absolute mode
of StoppingRule) with the per-point tolerances of the delta budget, so
the quadrature-vs-iteration error split is guaranteed without access
to a reference solution.  Iteration-count tables instead use a direct
solve per point as the error-mode reference.

Tolerances are taken from the budget at the smallest requested t: the
per-point tolerance decreases with t, so one set of solves serves all
requested times.
"""

from __future__ import annotations

import cmath
import concurrent.futures
import csv
import json
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .contour import ContourQuadrature, ToleranceBudget, build_quadrature, inverse_transform, tolerance_budget
from .errors import ConfigError
from .fem import FemSpace, assemble, discrete_norm
from .krylov import cg_general_precond, cg_inv_precond, cg_shifted, eta_tilde, optimal_mu_cg
from .mesh import generate_trapezium_mesh, read_mesh
from .model import DIFFUSIVITY, exact_nodal_solution, model_load_vector
from .precond import PrecondCache, Preconditioner
from .richardson import (
    RichardsonPlan,
    optimize_mu_richardson,
    plan_basic,
    plan_general_precond,
    plan_general_zero_shift,
    plan_inv_precond,
    run_richardson,
)
from .spectral import lanczos_extremes, pencil_extremes, spectral_bounds
from .system import IterationReport, ShiftedSystem, StoppingRule

__all__ = [
    "RunConfig",
    "PointRecord",
    "SolveResult",
    "Workspace",
    "solve_parabolic",
    "emit_quad_table",
    "emit_richardson_table",
    "emit_cg_table",
    "emit_iterations_table",
    "emit_history",
    "write_rows",
]

_METHODS = ("cg", "richardson", "direct")
_PRECOND_KINDS = ("none", "inv", "ic0", "sgs")


def _parse_precond(text: str) -> Tuple[str, int]:
    kind, _, arg = text.partition(":")
    if kind not in _PRECOND_KINDS:
        raise ConfigError(f"unknown preconditioner {text!r}; expected one of "
                          f"{', '.join(_PRECOND_KINDS)} (sgs takes sgs:k)")
    k = 1
    if arg:
        if kind != "sgs":
            raise ConfigError(f"only sgs takes a :k suffix, got {text!r}")
        try:
            k = int(arg)
        except ValueError:
            raise ConfigError(f"bad step count in {text!r}") from None
        if k < 1:
            raise ConfigError(f"need k >= 1 in {text!r}")
    return kind, k


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one run; invalid fields raise ConfigError."""

    q: int = 20
    t_values: Tuple[float, ...] = (1.0,)
    mesh_m: int = 40
    mesh_files: Optional[Tuple[str, str]] = None
    a: float = DIFFUSIVITY
    method: str = "cg"
    precond: str = "inv"
    mu: Union[str, float] = "auto"
    delta: float = 1e-5
    warm_start: bool = True
    lumped: bool = False
    lambda1: Optional[float] = None
    lambda_n: Optional[float] = None
    threads: int = 1
    max_iterations: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError(f"need q >= 1, got {self.q}")
        if not self.t_values:
            raise ConfigError("need at least one t value")
        if any(t <= 0.0 for t in self.t_values):
            raise ConfigError(f"t values must be positive, got {self.t_values}")
        if self.mesh_files is None and self.mesh_m < 2:
            raise ConfigError(f"need mesh_m >= 2, got {self.mesh_m}")
        if self.a <= 0.0:
            raise ConfigError(f"need a > 0, got {self.a}")
        if self.method not in _METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        _parse_precond(self.precond)
        if self.mu != "auto":
            try:
                object.__setattr__(self, "mu", float(self.mu))
            except (TypeError, ValueError):
                raise ConfigError(f"mu must be 'auto' or a number, got {self.mu!r}") from None
        if self.delta <= 0.0:
            raise ConfigError(f"need delta > 0, got {self.delta}")
        if self.threads < 1:
            raise ConfigError(f"need threads >= 1, got {self.threads}")
        if self.max_iterations < 1:
            raise ConfigError(f"need max_iterations >= 1, got {self.max_iterations}")
        if self.lambda1 is not None and self.lambda1 <= 0.0:
            raise ConfigError(f"need lambda1 > 0, got {self.lambda1}")
        if (
            self.lambda1 is not None
            and self.lambda_n is not None
            and self.lambda_n <= self.lambda1
        ):
            raise ConfigError("need lambda_n > lambda1")

    @property
    def precond_kind(self) -> Tuple[str, int]:
        return _parse_precond(self.precond)


@dataclass(frozen=True)
class PointRecord:
    """Outcome of the solve at one quadrature point."""

    j: int
    z: complex
    iterations: int
    converged: bool
    norm_w: float
    tolerance: float
    seconds: float
    history: np.ndarray


@dataclass(frozen=True)
class SolveResult:
    records: Tuple[PointRecord, ...]
    u_values: Dict[float, np.ndarray]
    u_norms: Dict[float, float]
    errors: Dict[float, float]

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.records)

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.records)


class Workspace:
    """Assembled mesh, quadrature, spectral data, and preconditioner cache."""

    def __init__(self, config: RunConfig):
        self.config = config
        if config.mesh_files is not None:
            mesh = read_mesh(*config.mesh_files)
        else:
            mesh = generate_trapezium_mesh(config.mesh_m)
        self.space = assemble(mesh, config.a)
        self.quad = build_quadrature(config.q)
        self.budget = tolerance_budget(config.delta, min(config.t_values), self.quad)
        mass = self.space.lumped if config.lumped else self.space.mass
        self.system_mass = mass
        if config.lambda1 is not None and config.lambda_n is not None:
            self.lam1, self.lam_n = config.lambda1, config.lambda_n
        else:
            lo, hi = pencil_extremes(self.space.stiffness, mass, tol=1e-10)
            self.lam1 = config.lambda1 if config.lambda1 is not None else lo.value
            self.lam_n = config.lambda_n if config.lambda_n is not None else hi.value
        if config.lumped:
            self.mass_floor = float(np.min(self.space.lumped))
            precond_space = replace(
                self.space, mass=sp.diags(self.space.lumped).tocsr()
            )
        else:
            low, _ = lanczos_extremes(
                lambda v: self.space.mass @ v,
                sp.identity(self.space.size, format="csr"),
                self.space.size,
                tol=1e-8,
                which="min",
                seed=config.seed,
            )
            self.mass_floor = low.value
            precond_space = self.space
        self.precond_space = precond_space
        self.cache = PrecondCache(precond_space, lam1=self.lam1)

    def system(self, z: complex) -> ShiftedSystem:
        return ShiftedSystem(
            self.system_mass, self.space.stiffness, z, model_load_vector(self.space, z)
        )

    def direct(self, system: ShiftedSystem) -> np.ndarray:
        if system.lumped:
            matrix = sp.diags(system.z * system.mass) + system.stiffness
        else:
            matrix = system.z * system.mass + system.stiffness
        return spla.splu(matrix.tocsc()).solve(system.g)

    def resolve_mu(self, z: complex, for_cg_inv: bool) -> float:
        if self.config.mu != "auto":
            return float(self.config.mu)
        if for_cg_inv:
            return optimal_mu_cg(self.lam1, self.lam_n, z)[0]
        return optimize_mu_richardson(self.lam1, math.inf, z)

    def ensure_metadata(self, pc: Preconditioner, kind: str, k: int) -> None:
        """Fill m, M, ||B|| (and the sgs one-step contraction) lazily."""
        if pc.m is None or pc.big_m is None or pc.norm_b is None:
            bounds = spectral_bounds(
                pc.apply, pc.mu, self.precond_space, tol=1e-6, max_steps=150
            )
            pc.m, pc.big_m, pc.norm_b = bounds.lower, bounds.upper, bounds.norm_b
        if kind == "sgs" and pc.rho is None:
            one = self.cache.get("sgs", pc.mu, 1)
            shifted = (
                pc.mu * self.precond_space.mass + self.precond_space.stiffness
            ).tocsr()
            _, top = lanczos_extremes(
                lambda v: v - one.apply(shifted @ v),
                shifted,
                self.space.size,
                tol=1e-6,
                max_steps=150,
                which="max",
                seed=self.config.seed,
            )
            pc.rho = min(max(top.value, 0.0), 1.0)

    def general_plan(self, pc: Preconditioner, z: complex, kind: str, k: int) -> RichardsonPlan:
        self.ensure_metadata(pc, kind, k)
        zhat = z - pc.mu
        if abs(zhat) <= 1e-12 * max(1.0, abs(z)):
            return plan_general_zero_shift(pc.m, pc.big_m)
        gamma = None
        if kind == "sgs" and pc.rho is not None and zhat.real < 0.0:
            # ||B_k T - I|| <= rho^k; positive gamma sharpens the plan.
            slack = pc.rho**k
            candidate = abs(zhat.real) - slack * (abs(zhat.real) + abs(zhat.imag))
            if candidate > 0.0:
                gamma = candidate
        return plan_general_precond(
            pc.m,
            pc.big_m,
            abs(zhat) * pc.norm_b,
            cmath.phase(zhat),
            gamma=gamma,
            zhat_abs=abs(zhat),
        )


def _direct_report(ws: Workspace, system: ShiftedSystem, tolerance: float) -> IterationReport:
    from .system import Stopwatch

    watch = Stopwatch()
    w = ws.direct(system)
    scale = float(np.linalg.norm(system.g))
    measure = float(np.linalg.norm(system.residual(w))) / scale if scale else 0.0
    return IterationReport(
        iterations=0,
        converged=True,
        history=np.array([measure]),
        solution=w,
        mode="direct",
        tolerance=tolerance,
        seconds=watch.seconds(),
    )


def solve_point(
    ws: Workspace,
    j: int,
    tolerance: float,
    w0: Optional[np.ndarray] = None,
    reference: Optional[np.ndarray] = None,
    method: Optional[str] = None,
    precond: Optional[str] = None,
    max_iterations: Optional[int] = None,
) -> IterationReport:
    """Solve the j-th shifted system by the configured (or overridden) method."""
    cfg = ws.config
    method = cfg.method if method is None else method
    kind, k = _parse_precond(cfg.precond if precond is None else precond)
    z = ws.quad.node(j)
    system = ws.system(z)
    if method == "direct":
        return _direct_report(ws, system, tolerance)
    stop = StoppingRule(
        tolerance=tolerance,
        max_iterations=cfg.max_iterations if max_iterations is None else max_iterations,
        reference=reference,
        interval=None if reference is not None else (ws.lam1, ws.lam_n),
        mass_floor=None if reference is not None else ws.mass_floor,
    )
    if method == "richardson":
        if kind == "none":
            plan = plan_basic(ws.lam1, ws.lam_n, z)
            return run_richardson(system, plan, w0=w0, stop=stop)
        mu = ws.resolve_mu(z, for_cg_inv=False)
        if kind == "inv":
            plan = plan_inv_precond(ws.lam1, math.inf, z, mu)
            pc = ws.cache.get("inv", mu)
            return run_richardson(system, plan, precond=pc.apply, w0=w0, stop=stop)
        pc = ws.cache.get(kind, mu, k)
        plan = ws.general_plan(pc, z, kind, k)
        return run_richardson(system, plan, precond=pc.apply, w0=w0, stop=stop)
    if kind == "none":
        return cg_shifted(system, w0=w0, stop=stop)
    if kind == "inv":
        mu = ws.resolve_mu(z, for_cg_inv=True)
        pc = ws.cache.get("inv", mu)
        return cg_inv_precond(system, mu, w0=w0, stop=stop, shifted_solve=pc.apply)
    mu = ws.resolve_mu(z, for_cg_inv=False)
    pc = ws.cache.get(kind, mu, k)
    return cg_general_precond(system, pc.apply, w0=w0, stop=stop)


def _run_chain(ws: Workspace, js: Sequence[int], tolerances: Dict[int, float]) -> List[Tuple[int, IterationReport]]:
    out = []
    w0 = None
    for j in js:
        rep = solve_point(ws, j, tolerances[j], w0=w0)
        out.append((j, rep))
        w0 = rep.solution if ws.config.warm_start else None
    return out


def solve_parabolic(cfg: RunConfig, workspace: Optional[Workspace] = None) -> SolveResult:
    """Solve all quadrature points and synthesize U(t) for each requested t.

    Points are processed in chunks of consecutive j (one chunk per
    thread); each chunk warm-starts internally, so results do not
    depend on scheduling.
    """
    ws = Workspace(cfg) if workspace is None else workspace
    tolerances = {j: ws.budget.tol(j, cfg.q) for j in range(cfg.q + 1)}
    chunks = [c for c in np.array_split(np.arange(cfg.q + 1), cfg.threads) if len(c)]
    if len(chunks) == 1:
        gathered = _run_chain(ws, chunks[0].tolist(), tolerances)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [
                pool.submit(_run_chain, ws, chunk.tolist(), tolerances)
                for chunk in chunks
            ]
            gathered = [item for fut in futures for item in fut.result()]
    gathered.sort(key=lambda pair: pair[0])
    records = []
    samples = {}
    for j, rep in gathered:
        samples[j] = rep.solution
        records.append(
            PointRecord(
                j=j,
                z=ws.quad.node(j),
                iterations=rep.iterations,
                converged=rep.converged,
                norm_w=discrete_norm(rep.solution, ws.space),
                tolerance=tolerances[j],
                seconds=rep.seconds,
                history=rep.history,
            )
        )
    u_values, u_norms, errors = {}, {}, {}
    for t in cfg.t_values:
        u = inverse_transform(samples, ws.quad, t)
        u_values[t] = u
        u_norms[t] = discrete_norm(u, ws.space)
        errors[t] = discrete_norm(u - exact_nodal_solution(ws.space, t), ws.space)
    return SolveResult(
        records=tuple(records), u_values=u_values, u_norms=u_norms, errors=errors
    )


# ---------------------------------------------------------------------------
# table builders; each returns (columns, rows, meta)


def _table_lambdas(cfg: RunConfig, need_lam_n: bool) -> Tuple[float, Optional[float], Optional[Workspace]]:
    """lambda overrides if given, else estimates from the configured mesh."""
    if cfg.lambda1 is not None and (cfg.lambda_n is not None or not need_lam_n):
        return cfg.lambda1, cfg.lambda_n, None
    ws = Workspace(cfg)
    return ws.lam1, ws.lam_n, ws


def emit_quad_table(cfg: RunConfig):
    quad = build_quadrature(cfg.q)
    budget = tolerance_budget(cfg.delta, min(cfg.t_values), quad)
    columns = ["j", "xi_j", "x_j", "y_j", "abs_dz_j", "eps_j"]
    rows = []
    for j in quad.js:
        z, dz = quad.node(j), quad.dnode(j)
        rows.append([j, quad.xi[quad.index(j)], z.real, z.imag, abs(dz), budget.eps[quad.index(j)]])
    meta = {"q": cfg.q, "delta": cfg.delta, "t": min(cfg.t_values), "k": quad.k}
    return columns, rows, meta


def emit_richardson_table(cfg: RunConfig):
    """Acceleration parameters per quadrature point.

    Unpreconditioned and shifted-inverse groups are mesh-free given
    lambda_1 (and lambda_N for the basic group); the shifted-inverse
    group uses the lambda_N -> infinity endpoint, whose predictions
    hold a fortiori for any finite spectrum.  With an ic0/sgs
    preconditioner configured, appends its general-theory group
    (computed on the mesh).
    """
    lam1, lam_n, ws = _table_lambdas(cfg, need_lam_n=True)
    quad = build_quadrature(cfg.q)
    kind, k = cfg.precond_kind
    general = kind in ("ic0", "sgs")
    if general and ws is None:
        ws = Workspace(cfg)
    columns = [
        "j", "x_j", "y_j",
        "rho", "phi", "eps",
        "inv_rho", "inv_phi", "inv_mu", "inv_eps",
        "hat_rho", "hat_phi", "hat_eps",
        "breve_rho", "breve_phi", "breve_eps",
    ]
    if general:
        columns += ["pc_rho", "pc_phi", "pc_eps"]
    rows = []
    for j in range(cfg.q + 1):
        z = quad.node(j)
        basic = plan_basic(lam1, lam_n, z)
        mu = optimize_mu_richardson(lam1, math.inf, z)
        inv = plan_inv_precond(lam1, math.inf, z, mu)
        zhat = z - mu
        if abs(zhat) <= 1e-12 * max(1.0, abs(z)):
            hat = plan_general_zero_shift(1.0, 1.0)
            brv = hat
        else:
            lam = abs(zhat) / (lam1 + mu)
            zeta = cmath.phase(zhat)
            hat = plan_general_precond(1.0, 1.0, lam, zeta)
            brv = plan_general_precond(
                1.0, 1.0, lam, zeta, gamma=-zhat.real, zhat_abs=abs(zhat)
            )
        row = [
            j, z.real, z.imag,
            basic.rho, basic.phi, basic.predicted,
            inv.rho, inv.phi, mu, inv.predicted,
            hat.rho, hat.phi, hat.predicted,
            brv.rho, brv.phi, brv.predicted,
        ]
        if general:
            mu_pc = ws.resolve_mu(z, for_cg_inv=False)
            pc = ws.cache.get(kind, mu_pc, k)
            plan = ws.general_plan(pc, z, kind, k)
            row += [plan.rho, plan.phi, plan.predicted]
        rows.append(row)
    meta = {"q": cfg.q, "lambda1": lam1, "lambda_n": lam_n, "precond": cfg.precond}
    return columns, rows, meta


def emit_cg_table(cfg: RunConfig):
    """Per-step factors |eta|, |eta_tilde| and the optimal shift per point."""
    lam1, lam_n, _ = _table_lambdas(cfg, need_lam_n=True)
    quad = build_quadrature(cfg.q)
    from .krylov import chebyshev_prediction

    columns = ["j", "x_j", "y_j", "abs_eta", "abs_eta_tilde", "mu", "abs_eta_tilde_mu0"]
    rows = []
    for j in range(cfg.q + 1):
        z = quad.node(j)
        factor = chebyshev_prediction(lam1, lam_n, z, n_max=0).factor
        mu, et = optimal_mu_cg(lam1, lam_n, z)
        rows.append([j, z.real, z.imag, factor, et, mu, abs(eta_tilde(lam1, lam_n, z, 0.0))])
    meta = {"q": cfg.q, "lambda1": lam1, "lambda_n": lam_n}
    return columns, rows, meta


_ITERATION_COLUMNS = (
    ("rich_inv", "richardson", "inv"),
    ("rich_sgs3", "richardson", "sgs:3"),
    ("cg_none", "cg", "none"),
    ("cg_inv", "cg", "inv"),
    ("cg_ic0", "cg", "ic0"),
    ("cg_sgs1", "cg", "sgs:1"),
)


def emit_iterations_table(cfg: RunConfig):
    """Iteration counts per quadrature point for six method/preconditioner
    pairs, measured against a direct reference at the budget tolerance."""
    ws = Workspace(cfg)
    tolerances = {j: ws.budget.tol(j, cfg.q) for j in range(cfg.q + 1)}
    references = {}
    norms = {}
    for j in range(cfg.q + 1):
        system = ws.system(ws.quad.node(j))
        wd = ws.direct(system)
        references[j] = wd
        norms[j] = discrete_norm(wd, ws.space)
    counts: Dict[str, Dict[int, int]] = {}
    failures = []
    for name, method, precond in _ITERATION_COLUMNS:
        counts[name] = {}
        w0 = None
        for j in range(cfg.q + 1):
            rep = solve_point(
                ws, j, tolerances[j], w0=w0, reference=references[j],
                method=method, precond=precond,
            )
            counts[name][j] = rep.iterations
            if not rep.converged:
                failures.append((name, j))
            w0 = rep.solution if cfg.warm_start else None
    columns = ["j"] + [name for name, _, _ in _ITERATION_COLUMNS] + ["norm_w", "eps_j"]
    rows = [
        [j] + [counts[name][j] for name, _, _ in _ITERATION_COLUMNS]
        + [norms[j], tolerances[j]]
        for j in range(cfg.q + 1)
    ]
    meta = {
        "q": cfg.q,
        "delta": cfg.delta,
        "t": min(cfg.t_values),
        "lambda1": ws.lam1,
        "lambda_n": ws.lam_n,
        "warm_start": cfg.warm_start,
        "non_converged": failures,
    }
    return columns, rows, meta


def emit_history(cfg: RunConfig, j: int):
    """Per-iteration stopping measure at one quadrature point (cold start)."""
    ws = Workspace(cfg)
    if not 0 <= j <= cfg.q:
        raise ConfigError(f"need 0 <= j <= q={cfg.q}, got {j}")
    rep = solve_point(ws, j, ws.budget.tol(j, cfg.q))
    columns = ["n", "measure"]
    rows = [[n, value] for n, value in enumerate(rep.history)]
    meta = {
        "j": j,
        "z": [ws.quad.node(j).real, ws.quad.node(j).imag],
        "method": cfg.method,
        "precond": cfg.precond,
        "converged": rep.converged,
        "mode": rep.mode,
        "tolerance": rep.tolerance,
    }
    return columns, rows, meta


# ---------------------------------------------------------------------------
# output


def _plain(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _format_cell(value) -> str:
    value = _plain(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_rows(out, fmt: str, columns: Sequence[str], rows: Sequence[Sequence], meta: Optional[dict] = None) -> None:
    """Write a table to a path or file object as CSV or JSON.

    CSV holds the data only (deterministic byte-for-byte for a given
    config); JSON wraps rows with the meta mapping.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    own = isinstance(out, str)
    handle = sys.stdout if out == "-" else (open(out, "w", newline="") if own else out)
    try:
        if fmt == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
        else:
            payload = {
                "meta": {key: _plain(v) for key, v in (meta or {}).items()},
                "columns": list(columns),
                "rows": [[_plain(v) for v in row] for row in rows],
            }
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    finally:
        if own and out != "-":
            handle.close()

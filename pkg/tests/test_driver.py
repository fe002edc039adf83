import csv
import io
import json
import math

import numpy as np
import pytest

from contourheat.contour import build_quadrature, tolerance_budget, write_quadrature_csv
from contourheat.driver import (
    RunConfig,
    Workspace,
    _parse_precond,
    emit_cg_table,
    emit_history,
    emit_iterations_table,
    emit_quad_table,
    emit_richardson_table,
    solve_parabolic,
    solve_point,
    write_rows,
)
from contourheat.errors import ConfigError
from contourheat.fem import discrete_norm
from contourheat.krylov import optimal_mu_cg
from contourheat.richardson import optimize_mu_richardson

SMALL = dict(q=8, mesh_m=8, t_values=(1.0,), delta=1e-4)


@pytest.fixture(scope="module")
def small_ws():
    return Workspace(RunConfig(**SMALL))


def _csv_text(columns, rows, meta=None):
    buffer = io.StringIO()
    write_rows(buffer, "csv", columns, rows, meta)
    return buffer.getvalue()


def test_parse_precond():
    assert _parse_precond("none") == ("none", 1)
    assert _parse_precond("inv") == ("inv", 1)
    assert _parse_precond("ic0") == ("ic0", 1)
    assert _parse_precond("sgs") == ("sgs", 1)
    assert _parse_precond("sgs:3") == ("sgs", 3)
    for bad in ("ssor", "inv:2", "sgs:0", "sgs:x", ""):
        with pytest.raises(ConfigError):
            _parse_precond(bad)


def test_runconfig_validation():
    for kwargs in (
        dict(q=0),
        dict(t_values=()),
        dict(t_values=(0.0,)),
        dict(t_values=(1.0, -2.0)),
        dict(mesh_m=1),
        dict(a=0.0),
        dict(method="gmres"),
        dict(precond="ssor"),
        dict(mu="fast"),
        dict(delta=0.0),
        dict(threads=0),
        dict(max_iterations=0),
        dict(lambda1=-1.0),
        dict(lambda1=2.0, lambda_n=1.0),
    ):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)
    cfg = RunConfig(mu="2.5", precond="sgs:4")
    assert cfg.mu == 2.5
    assert cfg.precond_kind == ("sgs", 4)


def test_solve_parabolic_is_deterministic(small_ws):
    cfg = small_ws.config
    first = solve_parabolic(cfg, workspace=small_ws)
    second = solve_parabolic(cfg, workspace=small_ws)
    assert first.all_converged
    assert [r.iterations for r in first.records] == [
        r.iterations for r in second.records
    ]
    assert np.array_equal(first.u_values[1.0], second.u_values[1.0])
    assert first.u_norms[1.0] == second.u_norms[1.0]
    # Spatial accuracy of the coarse mesh dominates the budget here.
    assert first.errors[1.0] < 5e-3
    assert first.total_iterations > 0
    columns = ["j", "iterations", "norm_w"]
    rows = [[r.j, r.iterations, r.norm_w] for r in first.records]
    rows2 = [[r.j, r.iterations, r.norm_w] for r in second.records]
    assert _csv_text(columns, rows) == _csv_text(columns, rows2)


def test_threaded_run_reproduces_itself_and_stays_on_budget(small_ws):
    cfg = RunConfig(**SMALL, threads=2)
    ws = Workspace(cfg)
    one = solve_parabolic(cfg, workspace=ws)
    two = solve_parabolic(cfg, workspace=ws)
    assert one.all_converged and two.all_converged
    assert np.array_equal(one.u_values[1.0], two.u_values[1.0])
    # Chunked warm starts change iteration counts, not the answer: both
    # runs sit within the same quadrature budget of the direct synthesis.
    serial = solve_parabolic(small_ws.config, workspace=small_ws)
    diff = discrete_norm(one.u_values[1.0] - serial.u_values[1.0], ws.space)
    assert diff <= 2.0 * cfg.delta


def test_mass_floor_bounds_mass_spectrum(small_ws):
    # The absolute stopping mode divides by sqrt(mass_floor); the bound
    # is only conservative if the floor sits below the whole spectrum.
    import scipy.linalg as sla

    dense = sla.eigh(small_ws.space.mass.toarray(), eigvals_only=True)
    assert small_ws.mass_floor <= dense[0] * (1.0 + 1e-8)
    assert small_ws.mass_floor == pytest.approx(dense[0], rel=1e-6)
    lumped_ws = Workspace(RunConfig(**SMALL, lumped=True))
    assert lumped_ws.mass_floor == float(np.min(lumped_ws.space.lumped))


def test_resolve_mu_branches(small_ws):
    z = small_ws.quad.node(5)
    auto_cg = small_ws.resolve_mu(z, for_cg_inv=True)
    auto_rich = small_ws.resolve_mu(z, for_cg_inv=False)
    assert auto_cg == optimal_mu_cg(small_ws.lam1, small_ws.lam_n, z)[0]
    assert auto_rich == optimize_mu_richardson(small_ws.lam1, math.inf, z)
    fixed_ws = Workspace(RunConfig(**SMALL, mu=3.25))
    assert fixed_ws.resolve_mu(z, for_cg_inv=True) == 3.25
    assert fixed_ws.resolve_mu(z, for_cg_inv=False) == 3.25


def test_fixed_mu_is_honored_in_solves(small_ws):
    cfg = RunConfig(**SMALL, mu=2.0)
    ws = Workspace(cfg)
    rep = solve_point(ws, 4, 1e-6)
    assert rep.converged
    assert set(ws.cache._store) == {("inv", 2.0, 1)}
    # The auto workspace picks point-dependent shifts instead.
    solve_point(small_ws, 3, 1e-6)
    solve_point(small_ws, 6, 1e-6)
    mus = {key[1] for key in small_ws.cache._store if key[0] == "inv"}
    assert len(mus) >= 2


def test_emit_quad_table_matches_contour_writer(tmp_path):
    cfg = RunConfig(q=6, t_values=(0.5,), delta=1e-6)
    columns, rows, meta = emit_quad_table(cfg)
    assert columns == ["j", "xi_j", "x_j", "y_j", "abs_dz_j", "eps_j"]
    assert len(rows) == 2 * cfg.q + 1
    assert meta["k"] == pytest.approx(math.log(6) / 6, rel=1e-14)
    quad = build_quadrature(cfg.q)
    budget = tolerance_budget(cfg.delta, 0.5, quad)
    path = tmp_path / "quad.csv"
    write_quadrature_csv(str(path), quad, budget)
    ours = list(csv.reader(io.StringIO(_csv_text(columns, rows))))
    theirs = list(csv.reader(path.open()))
    assert ours == theirs


def test_emit_richardson_table_general_group():
    cfg = RunConfig(q=4, mesh_m=8, precond="sgs:2")
    columns, rows, meta = emit_richardson_table(cfg)
    assert columns[-3:] == ["pc_rho", "pc_phi", "pc_eps"]
    assert len(rows) == cfg.q + 1
    by_j = {row[0]: dict(zip(columns, row)) for row in rows}
    assert by_j[0]["hat_eps"] == 0.0  # z = 0 is solved in one step
    for j in range(1, cfg.q + 1):
        row = by_j[j]
        assert 0.0 < row["eps"] < 1.0
        assert 0.0 < row["inv_eps"] < 1.0
        assert 0.0 < row["pc_eps"] < 1.0
        assert row["breve_eps"] <= row["hat_eps"] + 1e-12
    assert meta["precond"] == "sgs:2"
    # Mesh-free when both eigenvalue bounds are supplied.
    plain = RunConfig(q=4, lambda1=1.0138, lambda_n=4006.79)
    columns2, rows2, _ = emit_richardson_table(plain)
    assert "pc_rho" not in columns2
    assert len(rows2) == 5


def test_emit_cg_table_shapes():
    cfg = RunConfig(q=4, lambda1=1.0138, lambda_n=4006.79)
    columns, rows, meta = emit_cg_table(cfg)
    assert columns == [
        "j", "x_j", "y_j", "abs_eta", "abs_eta_tilde", "mu", "abs_eta_tilde_mu0",
    ]
    for row in rows:
        data = dict(zip(columns, row))
        assert 0.0 < data["abs_eta"] < 1.0
        assert data["abs_eta_tilde"] <= data["abs_eta_tilde_mu0"] + 1e-12
    assert meta["lambda1"] == 1.0138


def test_emit_iterations_table_small():
    cfg = RunConfig(q=4, mesh_m=8, delta=1e-4)
    columns, rows, meta = emit_iterations_table(cfg)
    names = ["rich_inv", "rich_sgs3", "cg_none", "cg_inv", "cg_ic0", "cg_sgs1"]
    assert columns == ["j"] + names + ["norm_w", "eps_j"]
    assert len(rows) == cfg.q + 1
    assert meta["non_converged"] == []
    table = {row[0]: dict(zip(columns, row)) for row in rows}
    totals = {name: sum(table[j][name] for j in table) for name in names}
    assert totals["cg_inv"] <= totals["cg_none"]
    for j in table:
        assert table[j]["norm_w"] > 0.0
        assert table[j]["eps_j"] > 0.0


def test_emit_history():
    cfg = RunConfig(**SMALL)
    columns, rows, meta = emit_history(cfg, j=3)
    assert columns == ["n", "measure"]
    assert rows[0][0] == 0
    assert len(rows) >= 2
    measures = [row[1] for row in rows]
    assert measures[-1] <= meta["tolerance"]
    assert meta["converged"] is True
    assert meta["mode"] == "absolute"
    assert meta["method"] == "cg" and meta["precond"] == "inv"
    with pytest.raises(ConfigError):
        emit_history(cfg, j=99)


def test_direct_method_reference_run(small_ws):
    cfg = RunConfig(**SMALL, method="direct")
    result = solve_parabolic(cfg)
    assert result.all_converged
    assert all(r.iterations == 0 for r in result.records)
    iterative = solve_parabolic(small_ws.config, workspace=small_ws)
    diff = discrete_norm(
        result.u_values[1.0] - iterative.u_values[1.0], small_ws.space
    )
    assert diff <= 2.0 * cfg.delta


def test_write_rows_formats(tmp_path):
    columns = ["j", "value", "flag"]
    rows = [[np.int64(1), np.float64(0.125), np.bool_(True)], [2, 1.0 / 3.0, False]]
    meta = {"q": np.int64(4), "delta": np.float64(1e-5)}
    text = _csv_text(columns, rows, meta)
    assert text.splitlines()[0] == "j,value,flag"
    assert text.splitlines()[1] == "1,0.125,True"
    assert "0.333333333333" in text.splitlines()[2]
    buffer = io.StringIO()
    write_rows(buffer, "json", columns, rows, meta)
    payload = json.loads(buffer.getvalue())
    assert payload["meta"] == {"q": 4, "delta": 1e-5}
    assert payload["columns"] == columns
    assert payload["rows"][0] == [1, 0.125, True]
    path = tmp_path / "table.csv"
    write_rows(str(path), "csv", columns, rows)
    assert path.read_text() == text
    with pytest.raises(ConfigError):
        write_rows(buffer, "xml", columns, rows)

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given
from hypothesis import strategies as st

from contourheat.system import (
    IterationReport,
    ShiftedSystem,
    StoppingRule,
    spectrum_distance,
)

from conftest import random_pencil


def _system(n=18, seed=0, z=complex(-0.5, 1.2), lumped=False):
    m, s = random_pencil(n, seed=seed)
    rng = np.random.default_rng(seed + 100)
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    mass = np.asarray(m.sum(axis=1)).ravel() if lumped else m
    return ShiftedSystem(mass, s, z, g), m, s


def test_matvec_and_residual_match_dense():
    system, m, s = _system()
    rng = np.random.default_rng(1)
    w = rng.standard_normal(18) + 1j * rng.standard_normal(18)
    dense = system.z * (m @ w) + s @ w
    assert np.allclose(system.matvec(w), dense, rtol=1e-13)
    assert np.allclose(system.residual(w), system.g - dense, rtol=1e-13)


def test_lumped_mass_variant():
    system, m, s = _system(lumped=True)
    assert system.lumped
    rng = np.random.default_rng(2)
    w = rng.standard_normal(18) + 1j * rng.standard_normal(18)
    lump = np.asarray(m.sum(axis=1)).ravel()
    assert np.allclose(system.apply_mass(w), lump * w, rtol=1e-14)
    assert np.allclose(system.mass_solve(w), w / lump, rtol=1e-14)


def test_m_norm_positive_definite():
    system, m, _ = _system()
    rng = np.random.default_rng(3)
    w = rng.standard_normal(18) + 1j * rng.standard_normal(18)
    assert system.m_norm(w) == pytest.approx(
        np.sqrt(np.real(np.vdot(w, m @ w))), rel=1e-13
    )
    assert system.m_norm(np.zeros(18)) == 0.0


@given(
    st.floats(min_value=-30.0, max_value=5.0),
    st.floats(min_value=0.0, max_value=30.0),
    st.floats(min_value=0.01, max_value=10.0),
    st.floats(min_value=0.1, max_value=1000.0),
)
def test_spectrum_distance_is_true_distance(x, y, lo, width):
    hi = lo + width
    z = complex(x, y)
    grid = np.linspace(lo, hi, 4001)
    brute = float(np.min(np.abs(z + grid)))
    dist = spectrum_distance(z, lo, hi)
    # The closed form minimizes over the full interval, the grid only
    # over 4001 samples, so it can only overestimate by the spacing.
    spacing = width / 4000.0
    assert dist <= brute + 1e-12
    assert brute <= dist + spacing


def test_absolute_mode_bounds_true_error():
    # ||e||_M <= ||rr|| / (sqrt(lambda_min(M)) dist(-z, spectrum)) must
    # hold for arbitrary iterates.
    system, m, s = _system(n=25, seed=5)
    dense = (system.z * m + s).toarray()
    exact = np.linalg.solve(dense, system.g)
    lam_m = np.linalg.eigvalsh(m.toarray())
    import scipy.linalg as sla

    pencil = sla.eigh(s.toarray(), m.toarray(), eigvals_only=True)
    stop = StoppingRule(
        tolerance=1e-8,
        interval=(pencil[0], pencil[-1]),
        mass_floor=lam_m[0],
    )
    assert stop.mode == "absolute"
    rng = np.random.default_rng(6)
    for _ in range(10):
        w = exact + 0.1 * (rng.standard_normal(25) + 1j * rng.standard_normal(25))
        bound = stop.measure(system, w, system.residual(w))
        assert system.m_norm(w - exact) <= bound * (1.0 + 1e-12)


def test_stopping_rule_modes():
    ref = np.zeros(4)
    assert StoppingRule(1e-6, reference=ref).mode == "error"
    assert StoppingRule(1e-6, interval=(1.0, 2.0), mass_floor=0.5).mode == "absolute"
    assert StoppingRule(1e-6).mode == "relative"
    with pytest.raises(ValueError):
        StoppingRule(0.0)
    with pytest.raises(ValueError):
        StoppingRule(1e-6, max_iterations=0)


def test_error_mode_measures_m_norm():
    system, m, _ = _system(n=12, seed=7)
    rng = np.random.default_rng(8)
    ref = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    stop = StoppingRule(1e-6, reference=ref)
    w = ref + 1e-3 * rng.standard_normal(12)
    assert stop.measure(system, w, None) == pytest.approx(
        system.m_norm(w - ref), rel=1e-13
    )


def test_report_history_contract():
    report = IterationReport(
        iterations=2,
        converged=True,
        history=np.array([1.0, 0.1, 0.01]),
        solution=np.zeros(3),
        mode="relative",
        tolerance=0.05,
        seconds=0.0,
    )
    assert report.final_measure == pytest.approx(0.01)
    assert len(report.history) == report.iterations + 1

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from contourheat.linalg import SpdFactor
from contourheat.precond import make_inv
from contourheat.spectral import (
    lambda1_fz,
    lanczos_extremes,
    pencil_extremes,
    spectral_bounds,
)

from conftest import random_pencil
from reference_tables import (
    MESH40_LAMBDA1,
    MESH40_LAMBDA_N,
    MESH40_LUMPED_LAMBDA1,
    MESH40_LUMPED_LAMBDA_N,
)


@pytest.mark.parametrize("n,seed", [(40, 0), (200, 1), (500, 2)])
def test_lanczos_matches_dense_pencil(n, seed):
    m, s = random_pencil(n, seed=seed, cond=500.0)
    dense = sla.eigh(s.toarray(), m.toarray(), eigvals_only=True)
    msolve = SpdFactor(m.tocsc()).solve
    lo, hi = lanczos_extremes(
        lambda v: msolve(s @ v), m, n, tol=1e-10, max_steps=n + 1
    )
    assert lo.converged and hi.converged
    assert lo.value == pytest.approx(dense[0], rel=1e-6)
    assert hi.value == pytest.approx(dense[-1], rel=1e-6)


def test_estimates_are_interior_to_true_range():
    # Rayleigh-Ritz never leaves the spectrum enclosure.
    n = 120
    m, s = random_pencil(n, seed=3, cond=1e4)
    dense = sla.eigh(s.toarray(), m.toarray(), eigvals_only=True)
    msolve = SpdFactor(m.tocsc()).solve
    lo, hi = lanczos_extremes(lambda v: msolve(s @ v), m, n, tol=1e-4)
    assert dense[0] - 1e-10 <= lo.value
    assert hi.value <= dense[-1] + 1e-10


def test_pencil_extremes_mesh40(space40, lam40):
    lo, hi = lam40
    assert lo == pytest.approx(MESH40_LAMBDA1, rel=1e-8)
    assert hi == pytest.approx(MESH40_LAMBDA_N, rel=1e-8)


def test_pencil_extremes_lumped(space40):
    lo, hi = pencil_extremes(space40.stiffness, space40.lumped, tol=1e-8)
    assert lo.value == pytest.approx(MESH40_LUMPED_LAMBDA1, rel=1e-5)
    assert hi.value == pytest.approx(MESH40_LUMPED_LAMBDA_N, rel=1e-5)


def test_spectral_bounds_of_exact_inverse(space8):
    mu = 0.8
    pc = make_inv(space8, mu)
    bounds = spectral_bounds(pc.apply, mu, space8, tol=1e-9)
    assert bounds.lower == pytest.approx(1.0, rel=1e-7)
    assert bounds.upper == pytest.approx(1.0, rel=1e-7)
    lo, _ = pencil_extremes(space8.stiffness, space8.mass, tol=1e-10)
    assert bounds.norm_b == pytest.approx(1.0 / (mu + lo.value), rel=1e-6)


def test_lambda1_fz_nonnegative_for_commuting_inverse(space8):
    # For the exact shifted inverse the compatibility eigenvalue stays
    # nonnegative up to gamma = -Re zhat, which certifies the sharp
    # bound; here gamma slightly below that threshold.
    mu = 0.7
    z = complex(-0.4, 1.1)
    pc = make_inv(space8, mu)
    val = lambda1_fz(pc.apply, z, mu, space8)
    assert val > -1e-10


def test_validation():
    m, s = random_pencil(10, seed=4)
    with pytest.raises(ValueError):
        lanczos_extremes(lambda v: v, m, 10, tol=0.0)
    with pytest.raises(ValueError):
        lanczos_extremes(lambda v: v, m, 10, which="middle")

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import HealthCheck, settings

from contourheat.fem import assemble
from contourheat.mesh import generate_trapezium_mesh
from contourheat.model import DIFFUSIVITY
from contourheat.spectral import pencil_extremes

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def space8():
    return assemble(generate_trapezium_mesh(8), DIFFUSIVITY)


@pytest.fixture(scope="session")
def space16():
    return assemble(generate_trapezium_mesh(16), DIFFUSIVITY)


@pytest.fixture(scope="session")
def space40():
    return assemble(generate_trapezium_mesh(40), DIFFUSIVITY)


@pytest.fixture(scope="session")
def lam40(space40):
    lo, hi = pencil_extremes(space40.stiffness, space40.mass, tol=1e-10)
    return lo.value, hi.value


def random_pencil(n: int, seed: int, cond: float = 100.0):
    """Dense SPD pair (M, S) with moderate conditioning, as sparse csr."""
    rng = np.random.default_rng(seed)
    qm, _ = np.linalg.qr(rng.standard_normal((n, n)))
    qs, _ = np.linalg.qr(rng.standard_normal((n, n)))
    m = qm @ np.diag(np.linspace(1.0, 3.0, n)) @ qm.T
    s = qs @ np.diag(np.geomspace(1.0, cond, n)) @ qs.T
    return sp.csr_matrix((m + m.T) / 2.0), sp.csr_matrix((s + s.T) / 2.0)

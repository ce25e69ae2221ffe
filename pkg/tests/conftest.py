import numpy as np
import pytest

from core.linalg import HermitianOperator, StateVector
from core.protocol import ZermeloProblem

DIMS = (2, 4, 8)
MAX_H0_NORM = 5.0


def random_hermitian(rng: np.random.Generator, dim: int, max_norm: float = MAX_H0_NORM) -> HermitianOperator:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (x + x.conj().T) / 2
    h *= max_norm * rng.uniform(0.2, 1.0) / np.linalg.norm(h, 2)
    return HermitianOperator.from_hermitian_part(h)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def make_random_problem(seed: int) -> ZermeloProblem:
    """Semilla par: estados genéricos; impar: objetivo ortogonal a ψ_i."""
    rng = np.random.default_rng(seed)
    dim = DIMS[seed % len(DIMS)]
    h0 = random_hermitian(rng, dim)
    psi_i = random_state(rng, dim)
    psi_f = random_state(rng, dim)
    if seed % 2:
        w = psi_f.amplitudes - psi_i.amplitudes * psi_i.inner(psi_f)
        psi_f = StateVector.normalized(w)
    return ZermeloProblem(h0, psi_i, psi_f, float(rng.uniform(0.5, 50.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=range(50), ids=lambda s: f"seed{s}")
def random_problem(request):
    return make_random_problem(request.param)


@pytest.fixture(params=range(50), ids=lambda s: f"seed{s}")
def ode_problem(request):
    return make_random_problem(request.param)

import numpy as np
import pytest

from mixedent import states


def random_unitary(rng, dim=4):
    """Independent Haar draw via scipy, used as an oracle input."""
    from scipy.stats import unitary_group

    return unitary_group.rvs(dim, random_state=rng)


def random_density(rng, rank=4):
    """Random state of the given rank built without the package sampler."""
    g = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_product_state(rng):
    a = random_density_qubit(rng)
    b = random_density_qubit(rng)
    return np.kron(a, b)


def random_density_qubit(rng):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    r = g @ g.conj().T
    return r / np.trace(r).real


def wootters_oracle(rho):
    """Concurrence straight from the textbook recipe with numpy.linalg."""
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    flipped = yy @ rho.conj() @ yy
    ev = np.linalg.eigvals(rho @ flipped)
    lam = np.sort(np.sqrt(np.clip(ev.real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def phi_plus():
    return states.bell_projector("phi+")


@pytest.fixture
def werner():
    return states.bell_diagonal([0.6, 0.4 / 3, 0.4 / 3, 0.4 / 3])

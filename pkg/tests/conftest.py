import numpy as np
import pytest

from heomdpt.hierarchy import assemble_heom
from heomdpt.models import preset


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def lmg(N=4, V=0.3, kappa=1.0, omega=1.0, gamma=1.0, k_max=3):
    model = preset("lmg_collective_decay", N=N, V=V, gamma=gamma,
                   kappa=kappa, omega=omega)
    return model, assemble_heom(model, k_max)


def random_density(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from sfmkl.kernels import KernelBank, SubKernelParam, build_gram_set
from sfmkl.scene import MicArray, two_layer_array, two_monopole_scene

K900 = 2 * np.pi * 900 / 340


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scene():
    return two_monopole_scene()


@pytest.fixture(scope="session")
def mics():
    return two_layer_array()


def random_bank(rng, D, k, beta_max=9.0):
    params = []
    for _ in range(D):
        v = rng.standard_normal(3)
        params.append(SubKernelParam(v / np.linalg.norm(v), rng.uniform(0, beta_max)))
    return KernelBank(tuple(params), k)


def small_problem(rng, M, D, k=12.0, radius=0.3, noise=0.0):
    """Random mic cloud, random bank and data drawn from a random mixture."""
    pos = rng.uniform(-radius, radius, (M, 3))
    mics = MicArray(pos)
    bank = random_bank(rng, D, k)
    gs = build_gram_set(mics, bank)
    a = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    s = gs.grams.mean(axis=0) @ a + noise * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
    return gs, s


# One summary line per acceptance criterion, printed at the end of the session.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)

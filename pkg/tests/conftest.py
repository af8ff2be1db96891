import numpy as np
import pytest

from nppt_activation.tensor import LabeledOperator, Layout


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_hermitian(rng, n):
    m = random_matrix(rng, n)
    return (m + m.conj().T) / 2


def random_density(rng, n):
    m = random_matrix(rng, n)
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def labeled(mat, entries):
    return LabeledOperator(Layout(entries), mat)

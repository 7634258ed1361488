import numpy as np
import pytest

from cuntz import MatrixElement, Perm


@pytest.fixture
def flip_flop():
    """The letter swap on two generators, level 1."""
    return Perm(2, 1, [1, 0])


@pytest.fixture
def shift_unitary():
    """The level-2 permutation (i,j) -> (j,i); its endomorphism is the shift."""
    return shift_unitary_perm(2)


def shift_unitary_perm(n):
    img = [0] * (n * n)
    for i in range(n):
        for j in range(n):
            img[i * n + j] = j * n + i
    return Perm(n, 2, img)


def hadamard():
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    return MatrixElement(2, 1, h)


def random_unitary(rng, size):
    """Haar-ish unitary from the QR of a complex Gaussian matrix."""
    z = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unitary_element(rng, n, k):
    return MatrixElement(n, k, random_unitary(rng, n ** k))


def random_perm(rng, n, k):
    return Perm(n, k, rng.permutation(n ** k).tolist())

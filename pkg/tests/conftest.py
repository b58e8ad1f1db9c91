import numpy as np
import pytest

from cvwitness import CovarianceMatrix, random_standard, thermal, tmsv
from cvwitness.covariance import local_direct_sum, one_mode_rotation


def pytest_configure(config):
    np.seterr(all="raise", under="ignore")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def assorted_cms():
    """A small corpus of bona fide CMs spanning the generator families."""
    from cvwitness import noisy_tmsv, vacuum

    cms = [
        vacuum(2),
        vacuum(3),
        thermal([0.5, 0.2]),
        tmsv(0.3),
        tmsv(1.2),
        noisy_tmsv(0.7, 0.4, "A"),
        noisy_tmsv(0.5, 0.8, "B"),
    ]
    cms += [random_standard(2, seed=s) for s in range(3)]
    cms += [random_standard(3, seed=s) for s in range(3)]
    cms += [random_standard(4, seed=s) for s in range(2)]
    return cms


def product_cm(b1: float, b2: float) -> CovarianceMatrix:
    """Uncorrelated two-mode CM diag(b1, b1) (+) diag(b2, b2)."""
    return CovarianceMatrix(np.diag([b1, b1, b2, b2]))


def rotated(cm: CovarianceMatrix, thetas) -> CovarianceMatrix:
    """Conjugate a CM by per-mode phase rotations (a local symplectic)."""
    s = local_direct_sum([one_mode_rotation(t) for t in thetas])
    n_alice = cm.n_alice if cm.n_modes >= 2 else None
    return CovarianceMatrix(s @ cm.matrix @ s.T, n_alice=n_alice)

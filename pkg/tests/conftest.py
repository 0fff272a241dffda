import warnings

import numpy as np
import pytest

from ctrfn import MonomialParams, TabcParams, make_TA, make_TA_star, make_Tabc


def tabc_grid(n_ab=10, n_phase=8):
    """The |a|, |b| in (0, 1) by arg(gamma) grid with |gamma| = 1."""
    mags = np.linspace(0.05, 0.95, n_ab)
    phases = np.linspace(0, 2 * np.pi, n_phase, endpoint=False)
    return [TabcParams.from_gamma(a, b, np.exp(1j * g)) for a in mags for b in mags for g in phases]


def random_pure(rng, r, c, norm=None):
    a = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    norm = rng.uniform(0.2, 0.95) if norm is None else norm
    return a * (norm / np.linalg.norm(a, 2))


def monomial_catalog(seed=7):
    """Random pure A up to 4x3 with m <= 4, both T_A and the flipped model."""
    rng = np.random.default_rng(seed)
    out = []
    for r, c in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3), (4, 3), (3, 3)]:
        for m in (1, 2, 3, 4):
            out.append(MonomialParams(random_pure(rng, r, c), m))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tabc_sample():
    return [make_Tabc(p) for p in tabc_grid(4, 2)]


@pytest.fixture(scope="session")
def monomial_sample():
    ps = monomial_catalog()[::3]
    return [(p, make_TA(p)) for p in ps] + [(p, make_TA_star(p)) for p in ps[:4]]


@pytest.fixture(autouse=True)
def _quiet_bilateral():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*bilateral.*")
        yield

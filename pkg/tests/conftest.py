import numpy as np
import pytest

from rabicrit.model import SystemParams, labeled_spectrum

FIG_RATES = dict(gamma1=0.05, gamma2=0.01, kappa_c_phi=0.05, kappa_q_phi=0.05)


@pytest.fixture(scope="session")
def np_params_r1e3():
    return SystemParams(ratio=1000, g=0.9, n_fock=120, **FIG_RATES)


@pytest.fixture(scope="session")
def np_spectrum_r1e3(np_params_r1e3):
    return labeled_spectrum(np_params_r1e3, m_keep=10, method="exact")


@pytest.fixture(scope="session")
def sp_params_r100():
    return SystemParams(ratio=100, g=1.1, n_fock=80, **FIG_RATES)


@pytest.fixture(scope="session")
def sp_spectrum_r100(sp_params_r100):
    return labeled_spectrum(sp_params_r100, m_keep=10, method="effective")


def seeded_hermitian_batch(dim, count, seed=11):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = 0.5 * (m + m.conj().T)
        h = h / np.trace(h).real if abs(np.trace(h).real) > 1e-6 else h + np.eye(dim)
        out.append(h)
    return out

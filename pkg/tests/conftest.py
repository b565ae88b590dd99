import numpy as np
import pytest

from qwalk_mc import CoinedState, CoinSpec

TWO_PI = 2 * np.pi


def random_spec(rng) -> CoinSpec:
    # lambda2 kept away from 0 so sampling tests can reuse these
    return CoinSpec(*rng.uniform(0, TWO_PI, 4))


def random_state(rng, sites: int = 11, pad: int = 1) -> CoinedState:
    """Normalized random state on ``sites`` sites with ``pad`` zero sites per side."""
    amps = rng.normal(size=(2, sites)) + 1j * rng.normal(size=(2, sites))
    amps /= np.linalg.norm(amps)
    z = np.zeros(pad, np.complex128)
    lo = -(sites // 2)
    return CoinedState(lo - pad, np.concatenate([z, amps[0], z]), np.concatenate([z, amps[1], z]))


def haar_unitary(rng) -> np.ndarray:
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def assert_states_close(a, b, tol):
    lo, hi = min(a.x_min, b.x_min), max(a.x_max, b.x_max)
    a, b = a.padded(lo, hi), b.padded(lo, hi)
    np.testing.assert_allclose(a.amp_plus, b.amp_plus, rtol=0, atol=tol)
    np.testing.assert_allclose(a.amp_minus, b.amp_minus, rtol=0, atol=tol)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

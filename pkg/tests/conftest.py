import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


def direct_sine_forward(f_interior, M):
    """O(M^2) oracle for the 1D transform: c_l = sum_j f_j sin(l j pi / M)."""
    j = np.arange(1, M)
    S = np.sin(np.pi * np.outer(j, j) / M)
    return S @ f_interior


def direct_sine_inverse(c, M):
    j = np.arange(1, M)
    S = np.sin(np.pi * np.outer(j, j) / M)
    return (2.0 / M) * (S @ c)


def zero_boundary(arr):
    out = np.array(arr, dtype=complex)
    for k in range(out.ndim):
        idx = [slice(None)] * out.ndim
        idx[k] = [0, -1]
        out[tuple(idx)] = 0
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    return request.config.stash.setdefault(ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(lines):
            terminalreporter.write_line(lines[cid])

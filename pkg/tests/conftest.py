import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bellnoise import scenarios  # noqa: E402
from bellnoise.states import ChiForm  # noqa: E402


def random_density_matrices(rng, n, rank=None):
    """Random full-rank (or fixed-rank) 4x4 states from Ginibre matrices."""
    k = rank or 4
    g = rng.normal(size=(n, 4, k)) + 1j * rng.normal(size=(n, 4, k))
    m = g @ np.conj(np.swapaxes(g, 1, 2))
    return m / np.trace(m, axis1=1, axis2=2)[:, None, None]


def random_unitaries(rng, n, d=4):
    z = (rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r, axis1=1, axis2=2)
    return q * (phases / np.abs(phases))[:, None, :]


_PAULIS = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
_ALICE = np.array([np.kron(p, np.eye(2)) for p in _PAULIS])
_CORR = np.array([np.kron(p, p) for p in _PAULIS])


def random_chi_forms(rng, n):
    """Physical chi-form data by rejection sampling, screened in batches with LAPACK."""
    out = []
    while len(out) < n:
        a = rng.normal(size=(4 * n, 3))
        a *= (rng.uniform(0, 1, size=4 * n) / np.linalg.norm(a, axis=1))[:, None]
        t = rng.uniform(-1, 1, size=(4 * n, 3))
        mats = (np.eye(4) + np.einsum("nk,kab->nab", a, _ALICE) + np.einsum("nk,kab->nab", t, _CORR)) / 4
        ok = np.linalg.eigvalsh(mats)[:, 0] >= 1e-12
        out.extend(ChiForm(ai, ti) for ai, ti in zip(a[ok], t[ok]))
    return out[:n]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def tables():
    return scenarios.reproduce_tables()


_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")

import time

import numpy as np
import pytest

from shortcut_qse.experiments import ScenarioConfig, run_full_sweep


def random_hermitian(rng, d=4, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, d=4):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d=4, rank=None):
    m = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def default_config():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def sweep(tmp_path_factory, default_config):
    """Default full sweep, shared by the experiment and acceptance tests."""
    config = default_config.replace(output_dir=tmp_path_factory.mktemp("sweep"))
    start = time.perf_counter()
    result = run_full_sweep(config)
    result.elapsed = time.perf_counter() - start
    return result


@pytest.fixture(scope="session")
def doubled_sweep(tmp_path_factory, default_config):
    config = default_config.replace(steps=2 * default_config.steps)
    return run_full_sweep(config, write=False)


ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def criterion():
    """Record ``(number, title, passed, detail)`` for the acceptance summary."""

    def record(number, title, passed, detail):
        ACCEPTANCE[number] = (bool(passed), title, detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")

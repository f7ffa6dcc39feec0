import numpy as np
import pytest

from robustpi.plants import AircraftParams, aircraft_error_plant, aircraft_plant
from robustpi.tuner import AIRCRAFT_K_STAR


def random_hurwitz(rng: np.random.Generator, n: int) -> np.ndarray:
    """Gaussian matrix shifted left so its spectral abscissa lies in [-1, -0.05]."""
    m = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(m).real) + rng.uniform(0.05, 1.0)
    return m - shift * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def air_params():
    return AircraftParams()


@pytest.fixture(scope="session")
def air_plant(air_params):
    return aircraft_plant(air_params)


@pytest.fixture(scope="session")
def air_lin(air_params):
    return aircraft_error_plant(air_params).linearization()


@pytest.fixture(scope="session")
def k_star():
    return AIRCRAFT_K_STAR


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def record(label: str, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

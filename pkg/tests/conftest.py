import numpy as np
import pytest

from foliamod import WarpProfile

ACCEPTANCE_LINES = {}


def record(criterion, passed, detail):
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


def builtin_profiles():
    """Every built-in family with the bands used throughout the suite."""
    return {
        "cylinder": WarpProfile.cylinder(0.0, 1.0),
        "torus": WarpProfile.torus(1.0),
        "euclidean": WarpProfile.euclidean(1.0, np.e),
        "euclidean-k2": WarpProfile.euclidean(1.0, 2.0, fiber_dim=2),
        "hyperbolic": WarpProfile.hyperbolic(1.0, 2.0),
        "spherical": WarpProfile.spherical(np.pi / 4, 3 * np.pi / 4),
    }


@pytest.fixture(scope="session")
def profiles():
    return builtin_profiles()


@pytest.fixture(scope="session")
def surface_profiles(profiles):
    return {k: v for k, v in profiles.items() if v.fiber_dim == 1}

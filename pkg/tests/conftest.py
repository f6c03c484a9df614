import pytest

from fracgm.ground_state import cached_ground_state
from fracgm.spectral import Grid1D

REF_GRID = Grid1D(2 ** 14, 200.0)


@pytest.fixture(scope="session")
def ref_grid():
    return REF_GRID


@pytest.fixture(scope="session")
def gs_half():
    return cached_ground_state(0.5, REF_GRID.n_points, REF_GRID.half_length)


@pytest.fixture(scope="session")
def gs_34():
    return cached_ground_state(0.75, REF_GRID.n_points, REF_GRID.half_length)


@pytest.fixture(scope="session")
def desk_34():
    """s = 3/4, eps = 0.02, k = 2 on the box used throughout the desk runs."""
    from fracgm.params import FracParams
    from fracgm.reduced import calibrate_constants

    gs = cached_ground_state(0.75, 2 ** 14, 500.0)
    params = FracParams.from_ground_state(gs, 0.02, 2)
    return gs, params, calibrate_constants(gs, params)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

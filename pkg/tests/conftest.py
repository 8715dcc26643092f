import time

import pytest

from clband import AmplifierParams, FiberParams, build_grid
from clband.optimizer import OptimizationProblem, PsoSettings, optimize_band_power


@pytest.fixture(scope="session")
def grid():
    return build_grid(64, 64)


@pytest.fixture(scope="session")
def mini_grid():
    return build_grid(8, 8)


@pytest.fixture(scope="session")
def fiber():
    return FiberParams()


@pytest.fixture(scope="session")
def amp():
    return AmplifierParams()


@pytest.fixture(scope="session")
def default_optimization(grid, fiber, amp):
    """Full band-wide optimization at default parameters, timed once.

    Shared by the optimizer unit tests and the acceptance suite so the
    expensive swarm run happens a single time per session.
    """
    problem = OptimizationProblem(
        grid=grid, fiber=fiber, amplifier=amp, pso=PsoSettings(seed=1)
    )
    t0 = time.monotonic()
    table = optimize_band_power(problem)
    elapsed = time.monotonic() - t0
    return table, elapsed

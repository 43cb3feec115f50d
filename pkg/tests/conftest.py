import numpy as np
import pytest

from taxkinetics import (
    IntegrationOptions,
    build_initial_state,
    build_tables,
    default_config,
    evolve_to_stationary,
    InitialConditionSpec,
)


@pytest.fixture(scope="session")
def baseline_config():
    return default_config()


@pytest.fixture(scope="session")
def baseline_tables(baseline_config):
    return build_tables(baseline_config)


@pytest.fixture(scope="session")
def deep_stationary(baseline_config, baseline_tables):
    """Baseline stationary state converged well below the default tolerance."""
    x0 = build_initial_state(InitialConditionSpec(), baseline_config)
    opts = IntegrationOptions(stationarity_tol=1e-13, max_time=1e5)
    result = evolve_to_stationary(x0, baseline_tables, opts)
    assert result.converged
    return result.state


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

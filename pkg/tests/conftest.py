import numpy as np
import pytest

from garchmoments import Family, ModelSpec, Params, fit, simulate


@pytest.fixture(scope="session")
def garch11_spec():
    return ModelSpec(Family.GARCH, q=1, p=1)


@pytest.fixture(scope="session")
def garch12_spec():
    return ModelSpec(Family.GARCH, q=2, p=1)


@pytest.fixture(scope="session")
def boundary_theta():
    """GARCH(1,2) design calibrated so tau = 1 at m = 3 (Gaussian moments)."""
    return Params(0.08, [0.05, 0.10], [0.8031104043889])


@pytest.fixture(scope="session")
def garch12_series(garch12_spec, boundary_theta):
    rng = np.random.default_rng(20240811)
    eta = rng.standard_normal(2500)
    return simulate(garch12_spec, boundary_theta, eta, burn_in=500)


@pytest.fixture(scope="session")
def garch12_fit(garch12_spec, garch12_series):
    result = fit(garch12_spec, garch12_series)
    assert result.converged
    return result


@pytest.fixture(scope="session")
def garch11_series(garch11_spec):
    rng = np.random.default_rng(77)
    eta = rng.standard_normal(5500)
    return simulate(garch11_spec, Params(0.08, [0.05], [0.90]), eta, burn_in=500)


@pytest.fixture(scope="session")
def garch11_fit(garch11_spec, garch11_series):
    result = fit(garch11_spec, garch11_series)
    assert result.converged
    return result

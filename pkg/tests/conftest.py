import numpy as np
import pytest

from modules.core.types import DiscretePreference
from modules.designers.options import DesignOptions
from modules.experiments.scenarios import DEMO_PREFERENCES, DEMO_SPVS
from modules.run_logger.logger import RunLogger


@pytest.fixture
def demo_spvs():
    return DEMO_SPVS.copy()


@pytest.fixture
def pref1(demo_spvs):
    """Uniform over the first two items; symbols 2 and 3 never appear."""
    return DiscretePreference(demo_spvs, DEMO_PREFERENCES["Pref 1"])


@pytest.fixture
def pref3(demo_spvs):
    return DiscretePreference(demo_spvs, DEMO_PREFERENCES["Pref 3"])


@pytest.fixture
def random_pref():
    def make(j=20, n=4, seed=0):
        rng = np.random.default_rng(seed)
        spvs = rng.dirichlet(np.ones(n), size=j)
        probs = rng.dirichlet(np.ones(j))
        return DiscretePreference(spvs / spvs.sum(axis=1, keepdims=True), probs)
    return make


@pytest.fixture
def fast_opts():
    return DesignOptions(restarts=3, max_iters=200, seed=7)


@pytest.fixture
def quiet_logger():
    return RunLogger("test", rate_limit=False)

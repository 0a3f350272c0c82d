import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hscalc import make_test_operator
from hscalc.errors import FiniteDifferenceWarning, NonConvergenceWarning

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_convergence_warnings():
    # tests that care about these warnings use pytest.warns explicitly
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        warnings.simplefilter("ignore", FiniteDifferenceWarning)
        yield


@pytest.fixture(scope="session")
def scalar_zero():
    return make_test_operator([0.0], "identity")


@pytest.fixture(scope="session")
def diag12():
    return make_test_operator([1.0, 2.0], "identity")


@pytest.fixture(scope="session")
def diag01():
    return make_test_operator([0.0, 1.0], "identity")


@pytest.fixture(scope="session")
def jordan4():
    return make_test_operator([-1.0, 0.0, 1.0, 2.0], "jordan_like", delta=0.1, seed=7)


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])

import math

import numpy as np
import pytest

from spheroidal.potential import ProblemParams, ConstantPotential
from spheroidal import riccati as rc


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure solve time."""
    s0 = rc.RiccatiState.from_y(0.1, 1j)
    rc.integrate(s0, 0.2, ConstantPotential(-1.0))
    p = ProblemParams(0, 1.0, 5.0)
    si = rc.singular_series_init(p, rc.default_u_eps(p))
    rc.integrate(si.state, math.pi / 2, p)
    p1 = ProblemParams(1, 1.0, 5.0)
    rc.wall_switch_init(p1, rc.default_u_eps(p1))
    from spheroidal import oracle
    oracle.oracle_eigenvalues(oracle.assemble(0, 1.0, 48), 4)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)

import numpy as np
import pytest

from monotoda.curves import HyperellipticCurve
from monotoda.riemann import ESData, es_solve, gamma_infinity_periods


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def solved_n2():
    """The n = 2 curve solving the constraint with ints (1, 0) from the t = 0 start."""
    rep = es_solve(2, ESData.from_list([1, 0]), HyperellipticCurve.toda(2, [0.0], 1.0))
    ud = gamma_infinity_periods(rep.curve, rep.periods)
    return rep, ud

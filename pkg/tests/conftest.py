import math

import pytest

from equiosc.examples import example71_problem
from equiosc.fields import harmonic_step_field, zero_field
from equiosc.kernels import log_sine, zero_kernel
from equiosc.sumtrans import Problem

LOG2 = math.log(2.0)


@pytest.fixture(scope="session")
def p71():
    return example71_problem()


@pytest.fixture(scope="session")
def p_zero2():
    return Problem(log_sine(), (1.0, 1.0), zero_field())


@pytest.fixture(scope="session")
def p54():
    return Problem(zero_kernel(), (1.0, 1.0), harmonic_step_field(100))

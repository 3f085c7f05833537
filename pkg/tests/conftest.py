import pytest

from orderfour.numeric import Precision
from orderfour.problems import PROBLEMS


@pytest.fixture(scope="session")
def p300():
    return Precision(300)


@pytest.fixture(scope="session")
def p600():
    return Precision(600)


@pytest.fixture(scope="session")
def p60():
    return Precision(60)


@pytest.fixture(params=sorted(PROBLEMS))
def problem(request):
    return PROBLEMS[request.param]

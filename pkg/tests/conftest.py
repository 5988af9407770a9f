import pytest
from hypothesis import HealthCheck, settings

from firmkit.samples import min_plus_one

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fig1():
    """The minimum-plus-one program over two arguments."""
    return min_plus_one()


@pytest.fixture
def fig1_const():
    """The same program with constants chosen so that ``a < b`` holds."""
    return min_plus_one(0, 1)


def pytest_terminal_summary(terminalreporter):
    from verdicts import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

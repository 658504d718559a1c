import pytest

from kerrcomb.cnoidal import base_wave


@pytest.fixture(scope="session")
def wave05():
    return base_wave(0.5, 256)


@pytest.fixture(scope="session")
def grid05(wave05):
    return wave05.grid


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

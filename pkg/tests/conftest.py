import re

import mpmath
import pytest

from leafrate import analytics
from leafrate.precision import PrecisionContext

# Values as printed in the source text, digit for digit.
PRINTED = {
    "alpha": "0.33832185689920769519611262571701705318",
    "z0": "1.48491739577413809587489",
    "x0": "0.3425384821514313844959919944869",
    "C1": "2.919380017448416911265032583985",
    "m": "0.4381562356643746639684921638628797837055",
    "sigma2": "0.150044811672846981980699640444640111071",
    "C2": "2.91833301345955740149786987821329181193",
    "otter_growth": "2.95576",
}

# a_n(z) rows of the printed bivariate series, n = 1..7, coefficient of z^k at index k
PRINTED_ROWS = {
    1: [0, 1],
    2: [0, 1],
    3: [0, 1, 1],
    4: [0, 1, 2, 1],
    5: [0, 1, 4, 3, 1],
    6: [0, 1, 6, 8, 4, 1],
    7: [0, 1, 9, 18, 14, 5, 1],
}

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        def key(line):
            m = re.match(r"criterion (\d+)(\w*)", line)
            return (int(m.group(1)), m.group(2)) if m else (99, line)

        for line in sorted(_acceptance_lines, key=key):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ctx30():
    return PrecisionContext(digits=30)


@pytest.fixture(scope="session")
def constants30(ctx30):
    return analytics.all_constants(ctx30)


@pytest.fixture(scope="session")
def ctx15():
    return PrecisionContext(digits=15)


@pytest.fixture(autouse=True)
def _default_precision():
    with mpmath.workdps(15):
        yield

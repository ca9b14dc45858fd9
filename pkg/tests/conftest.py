import numpy as np
import pytest
from hypothesis import settings

from oscillab import DeltaFunction, MainTermExpr, PrefixTable, application, closed_form_main_term
from oscillab.sieve import prefix_table

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture(scope="session")
def sawtooth():
    """a_n = 1 with M(x) = x: Delta is -{x} off the integers."""
    table = PrefixTable.from_values(np.ones(40_000))
    return DeltaFunction(table, MainTermExpr(((1 + 0j, 1 + 0j, 0),)))


@pytest.fixture(scope="session")
def zero_delta():
    """Synthetic table whose main term cancels exactly at every x."""
    table = PrefixTable.from_values(np.zeros(5_000))
    return DeltaFunction(table, MainTermExpr(()))


@pytest.fixture(scope="session")
def divisor_table():
    return prefix_table(application("divisor").kind, 1_000_000)


@pytest.fixture(scope="session")
def divisor_delta(divisor_table):
    return DeltaFunction(divisor_table, closed_form_main_term(application("divisor")))

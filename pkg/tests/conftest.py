import pytest

from ssrt.analysis import Bounds, builtin
from ssrt.fixtures import load_fixture

# small bounds that keep the bounded analyses fast
SMALL = Bounds(2, 2, 1)
MEDIUM = Bounds(3, 2, 1)

D1, D2, D3, D4, D5, D6, D7, D8, D9 = range(1, 10)


def word(*syms):
    """``word("a", 1, "b", 2)`` -> ``(("a", 1), ("b", 2))``."""
    return tuple(zip(syms[::2], syms[1::2]))


def plain(*values, letter="a"):
    return tuple((letter, d) for d in values)


@pytest.fixture(scope="session")
def ior():
    return builtin("identity_or_reverse")


@pytest.fixture(scope="session")
def example1():
    return load_fixture("identity_or_reverse").machine


# acceptance criterion -> (passed, detail); printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n} {'PASS' if ok else 'FAIL'} {detail}")

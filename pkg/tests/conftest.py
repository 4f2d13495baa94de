import pytest

from intervalsens import bundled_problem, load_problem, parse_problem

# (criterion number, passed, detail) tuples filled by test_acceptance.py
ACCEPTANCE_RESULTS = []

LINEAR_TEXT = """
vars x;
params a in [0.4,0.6];
box x in [-1,1];
nominal x = 0.5;
eq x - a;
"""


@pytest.fixture(scope="session")
def example1():
    return load_problem(bundled_problem("example1.prob"))


@pytest.fixture(scope="session")
def example2():
    return load_problem(bundled_problem("example2.prob"))


@pytest.fixture(scope="session")
def linear():
    return parse_problem(LINEAR_TEXT)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")

import pytest

from _util import EX1, EX2, NONFLAT, build


@pytest.fixture(scope="session")
def ex1():
    return build(EX1)


@pytest.fixture(scope="session")
def ex2():
    return build(EX2)


@pytest.fixture(scope="session")
def nonflat():
    return build(NONFLAT)


def pytest_terminal_summary(terminalreporter):
    from _util import CRITERIA

    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})")

import pytest

from kzising.analysis import critical_state


@pytest.fixture(scope="session")
def state_2000_100():
    return critical_state(2000, 100.0)


@pytest.fixture(scope="session")
def state_400_100():
    return critical_state(400, 100.0)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def _report(label: str, ok: bool, detail: str):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        assert ok, detail
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def report(number, title, passed, detail, seconds, limit):
        ok = passed and seconds < limit
        line = (f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
                f"  [{seconds:.2f} s, limit {limit:g} s]")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

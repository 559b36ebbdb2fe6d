import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion; returns a reporter."""

    def report(number: int, title: str, clauses: list) -> bool:
        ok = all(passed for _, passed in clauses)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in clauses)
        _LINES[number] = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(_LINES[number])
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])

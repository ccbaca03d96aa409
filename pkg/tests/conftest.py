import pytest

_RESULTS = pytest.StashKey[list]()


class _Criterion:
    """Context manager that prints one PASS/FAIL line for an acceptance criterion."""

    def __init__(self, lines: list, number: int, title: str):
        self.lines = lines
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        status = "PASS" if kind is None else "FAIL"
        note = self.detail if kind is None else (str(exc).splitlines() or [kind.__name__])[0]
        if kind is not None and self.detail:
            note = f"{self.detail}; {note}"
        line = f"criterion {self.number} {status}: {self.title} ({note})"
        print(line)
        self.lines.append(line)
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_RESULTS, [])
    return lambda number, title: _Criterion(lines, number, title)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

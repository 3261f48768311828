import pytest

_ACCEPTANCE: list[str] = []


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def __init__(self, sink):
        self._sink = sink

    def record(self, number, title, checks):
        """``checks`` is a list of ``(label, ok, detail)``; returns the overall verdict."""
        ok = all(c[1] for c in checks)
        parts = [f"{label} {'ok' if good else 'FAILED'} ({detail})" for label, good, detail in checks]
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'} {title}: " + "; ".join(parts)
        self._sink.append(line)
        print(line)
        return ok


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog(_ACCEPTANCE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)

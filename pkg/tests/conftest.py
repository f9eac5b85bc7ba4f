"""Shared test plumbing: the acceptance line recorder.

Acceptance tests announce one PASS/FAIL line per criterion; the lines are
echoed immediately (visible with -s) and replayed in a dedicated section
of the terminal summary so the gate is readable regardless of capture.
"""

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)

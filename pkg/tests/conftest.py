"""Shared fixtures plus an uncaptured acceptance-criteria summary.

Acceptance tests record one pass/fail record each; the terminal-summary
hook prints them after the run so the lines survive output capture.
"""

ACCEPTANCE_RESULTS = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE_RESULTS.append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"{status} {name}{suffix}")

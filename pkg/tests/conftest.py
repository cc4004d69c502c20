"""Shared test plumbing: the acceptance-criteria scoreboard.

Each acceptance test records one verdict line; after the run, every line is
echoed in its own terminal section so the scoreboard is visible in plain
``pytest`` / ``pytest -v`` output regardless of capture settings.
"""

ACCEPTANCE_LINES = []


def record_acceptance(index: int, ok: bool, detail: str) -> str:
    line = f"criterion {index}: {'PASS' if ok else 'FAIL'} — {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

"""Shared test infrastructure.

The acceptance suite registers one verdict per numbered criterion; the
terminal summary prints them as single PASS/FAIL lines so a run can be
audited at a glance even inside a long pytest log.
"""

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    _CRITERIA[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"ACCEPTANCE CRITERION {number}: {verdict} — {detail}")

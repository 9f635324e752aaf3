"""Shared pytest hooks: a per-gate verdict line for the acceptance suite."""

import re

_GATE = re.compile(r"test_criterion_(\d{2})_([a-z0-9_]+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            match = _GATE.search(getattr(report, "nodeid", "") or "")
            if match is None:
                continue
            key = (match.group(1), match.group(2))
            verdicts[key] = verdicts.get(key, True) and status == "passed"
    if not verdicts:
        return
    terminalreporter.write_line("")
    for number, name in sorted(verdicts):
        state = "PASS" if verdicts[(number, name)] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number} {name}: {state}")

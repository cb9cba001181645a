from __future__ import annotations

from collections import defaultdict

_criteria: dict = defaultdict(list)


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[props["criterion"]].append((props.get("part", ""), report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        parts = _criteria[number]
        failed = [p for p, outcome in parts if outcome != "passed"]
        line = f"criterion {number:>2}: {'FAIL' if failed else 'PASS'}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)

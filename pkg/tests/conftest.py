import re

ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = ACCEPTANCE.search(getattr(rep, "nodeid", ""))
            if m and (rep.when == "call" or outcome == "error"):
                lines.append((int(m.group(1)), m.group(2), "PASS" if outcome == "passed" else "FAIL"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n, name, status in sorted(set(lines)):
        terminalreporter.write_line(f"criterion {n:2d} {name:<28s} {status}")

import re

# one line per release criterion, printed in the terminal summary;
# PASS lines are appended by the acceptance tests themselves
acceptance_lines = []


def pytest_runtest_logreport(report):
    if report.when != "call" or not report.failed:
        return
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if m:
        acceptance_lines.append(
            f"criterion {m.group(1)}: FAIL - see {report.nodeid}")


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_lines):
            terminalreporter.write_line(line)

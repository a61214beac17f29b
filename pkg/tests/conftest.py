from collections import defaultdict

import pytest

CRITERIA = {
    1: "grid counts vs cross-product oracle and count bound",
    2: "C_1 and C_2 characterizations",
    3: "strict inclusion with v = (1, 1/(r+1))",
    4: "separation soundness on fuzzed matrices",
    5: "hierarchy nesting",
    6: "block sums and penalty of I + J",
    7: "boundary witnesses for coloring matrices",
    8: "game LP values, triangle certificate, monotonicity",
    9: "interior perturbation",
    10: "correlation variant and doubling",
    11: "LP certificate integrity on fuzzed LPs",
}

_outcomes: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by this test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        outcome = "passed" if call.excinfo is None else "failed"
        _outcomes[marker.args[0]].append((item.name, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            continue
        failed = [name for name, o in results if o != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n:2d} {status}  {CRITERIA[n]} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        tr.write_line(line)

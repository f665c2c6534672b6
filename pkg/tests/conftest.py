import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, list[tuple[str, str, str]]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            outcome = "XFAIL" if report.skipped else "XPASS"
        else:
            outcome = report.outcome.upper()
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA.setdefault(int(m.group(1)), []).append((m.group(2), outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        parts = _CRITERIA[k]
        outcomes = {o for _, o, _ in parts}
        if outcomes <= {"PASSED"}:
            status = "PASS"
        elif "FAILED" in outcomes or "XPASS" in outcomes:
            status = "FAIL"
        else:
            status = "FAIL (unattainable part recorded as strict xfail)"
        notes = "; ".join(f"{name}: {o.lower()}{' ' + d if d else ''}" for name, o, d in parts)
        tr.write_line(f"criterion {k:2d}: {status} | {notes}")

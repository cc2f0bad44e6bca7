import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, label = mark.args
            _results.setdefault(num, {"label": label, "outcomes": {}})
            _results[num]["outcomes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _results.values():
        if report.nodeid in entry["outcomes"]:
            if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
                entry["outcomes"][report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_results):
        entry = _results[num]
        outcomes = list(entry["outcomes"].values())
        if any(o is None for o in outcomes):
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        failed = [nid.split("::")[-1] for nid, o in entry["outcomes"].items() if o not in ("passed", None)]
        extra = f"  (failing: {', '.join(failed)})" if failed and status == "FAIL" else ""
        tr.write_line(f"criterion {num:2d}: {status:7s} {entry['label']}{extra}")

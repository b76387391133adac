import json

import pytest

from abcelect.election import Election

_criteria: dict[int, dict] = {}


@pytest.fixture
def e1():
    """Three voters (0.5, 0.3, 0.2) with ballots {c1}, {c1,c2}, {c3}; k = 2."""
    return Election.from_ballots([[0], [0, 1], [2]], [5, 3, 2], k=2).normalize()


@pytest.fixture
def e3():
    """Two equal voters with ballots {c1,c2} and {c3}; k = 2."""
    return Election.from_ballots([[0, 1], [2]], [1, 1], k=2, candidates=3).normalize()


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return write


E1_FILE = {
    "meta": {"era": 1},
    "k": 2,
    "ballot_cap": None,
    "candidates": ["c1", "c2", "c3"],
    "voters": [
        {"id": "v1", "weight": "0.5", "approvals": [0]},
        {"id": "v2", "weight": "0.3", "approvals": [0, 1]},
        {"id": "v3", "weight": "0.2", "approvals": [2]},
    ],
}

E3_FILE = {
    "meta": {"era": 2},
    "k": 2,
    "ballot_cap": None,
    "candidates": ["c1", "c2", "c3"],
    "voters": [
        {"id": "v1", "weight": 1, "approvals": [0, 1]},
        {"id": "v2", "weight": 1, "approvals": [2]},
    ],
}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": 0, "failed": 0, "skipped": 0})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            entry["skipped"] += 1
        elif report.failed:
            entry["failed"] += 1
        else:
            entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        if e["failed"]:
            status = "FAIL"
        elif e["passed"]:
            status = "PASS"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}")

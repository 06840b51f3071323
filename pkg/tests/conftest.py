from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[str, str] = {}
_members: dict[str, list[str]] = {}
_outcomes: dict[str, str] = {}


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "criterion(key, title): test belongs to an acceptance criterion")


def pytest_collection_finish(session: pytest.Session) -> None:
    for item in session.items:
        marker = item.get_closest_marker("criterion")
        if marker is None:
            continue
        key, title = marker.args
        _criteria[key] = title
        _members.setdefault(key, []).append(item.nodeid)


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    if report.failed:
        _outcomes[report.nodeid] = "failed"
    elif report.when == "call":
        _outcomes.setdefault(report.nodeid, report.outcome)


def pytest_terminal_summary(terminalreporter) -> None:
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        nodes = _members[key]
        passed = sum(1 for n in nodes if _outcomes.get(n) == "passed")
        status = "PASS" if passed == len(nodes) else "FAIL"
        terminalreporter.write_line(f"{status}  ({key}) {_criteria[key]}  [{passed}/{len(nodes)} tests]")


@pytest.fixture
def corpus_dir() -> Path:
    return FIXTURES / "corpus"

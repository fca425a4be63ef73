import pytest

from ibac.schema import PolicySchema, demo_policy_path, load_policy, worked_schema

_outcomes: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            key, title = mark.args
            _outcomes.setdefault(key, {"title": title, "nodes": {}})["nodes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _outcomes.values():
        nodes = entry["nodes"]
        if report.nodeid not in nodes:
            continue
        if report.when == "call" or report.failed or report.skipped:
            if nodes[report.nodeid] in (None, "passed"):
                nodes[report.nodeid] = "passed" if report.passed else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes, key=lambda k: int(k[2:])):
        entry = _outcomes[key]
        states = list(entry["nodes"].values())
        if any(s is None for s in states):
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(s == "passed" for s in states) else "FAIL"
        terminalreporter.write_line(f"{key} {verdict:<7} {entry['title']}")


@pytest.fixture(scope="session")
def worked():
    """Seven-label MI5/MI6 universe with auto-assigned codes."""
    return worked_schema()


@pytest.fixture(scope="session")
def demo_schema() -> PolicySchema:
    return load_policy(demo_policy_path())

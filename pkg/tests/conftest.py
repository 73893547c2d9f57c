import pytest

# (number, text) -> outcome, filled in as acceptance tests finish
_criteria = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    key = tuple(marker.args)
    passed = call.excinfo is None
    # a criterion split over several tests passes only if all of them pass
    _criteria[key] = _criteria.get(key, True) and passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, text), passed in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}")


@pytest.fixture(scope="session")
def acceptance_seed():
    return 20211

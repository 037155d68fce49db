import sys
from collections import OrderedDict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

# criterion label -> [description, outcomes]
_criteria = OrderedDict()
_node_to_label = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        label, text = mark.args
        _criteria.setdefault(label, [text, []])
        _node_to_label[item.nodeid] = label


def pytest_runtest_logreport(report):
    label = _node_to_label.get(report.nodeid)
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria[label][1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, (text, outcomes) in _criteria.items():
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{status:7} {label:7} {text}")


@pytest.fixture
def scenarios_dir():
    return SCENARIOS

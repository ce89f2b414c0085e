import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

MODELS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "models")

# criterion number -> (title, outcome, details)
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def model_path():
    return lambda name: os.path.join(MODELS, name)


@pytest.fixture
def report(request):
    """Attach measured values to the acceptance summary line."""
    marker = request.node.get_closest_marker("criterion")
    if marker is None:
        return lambda text: None
    details = _CRITERIA.setdefault(marker.args[0], [marker.args[1], None, []])[2]
    return details.append


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for number, title in getattr(report, "criterion", ()):
        entry = _CRITERIA.setdefault(number, [title, None, []])
        if entry[1] != "failed":
            entry[1] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion = [(m.args[0], m.args[1]) for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome, details = _CRITERIA[number]
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, "NOT RUN")
        line = f"[{verdict}] {number:>2}. {title}"
        if details:
            line += " | " + "; ".join(details)
        terminalreporter.write_line(line)

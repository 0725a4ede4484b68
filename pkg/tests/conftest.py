import pytest

from helpgraph.nn import TrainSchedule
from helpgraph.synthdata import SynthConfig, generate_with_truth

SMALL = SynthConfig(n_users=300, n_domains=200, n_labeled=80, seed=3)
FAST = TrainSchedule(epochs=3, steps_per_epoch=4, batch_size=32, pair_batch_size=64, repetitions=2)


@pytest.fixture(scope="session")
def small_data():
    graph, data, truth = generate_with_truth(SMALL)
    return graph, data, truth


@pytest.fixture
def fast_schedule():
    return FAST


# ---------------------------------------------------------------- acceptance report
#
# Tests marked ``@pytest.mark.criterion(n, "title")`` get one PASS/FAIL line in
# the terminal summary. A test may attach measured values through the
# ``criterion_note`` fixture; they are printed after the line.

_CRITERIA: dict[int, dict] = {}
_NOTES_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion_note(request):
    notes = request.node.stash.setdefault(_NOTES_KEY, [])
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False, "notes": []})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["ran"] = True
        entry["ok"] = entry["ok"] and report.passed
    if report.when == "teardown":
        entry["notes"].extend(item.stash.get(_NOTES_KEY, []))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] and entry["ran"] else ("SKIP" if not entry["ran"] else "FAIL")
        terminalreporter.write_line(f"[{status}] criterion {number}: {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"         {note}")

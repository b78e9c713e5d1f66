import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def detail(request):
    """Append a short human-readable note to the criterion's summary line."""
    notes = []
    request.node._criterion_notes = notes
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    notes = "; ".join(getattr(item, "_criterion_notes", []))
    if rep.when == "setup" and rep.skipped:
        _CRITERIA[n] = ("SKIP", str(rep.longrepr[-1]) if isinstance(rep.longrepr, tuple) else "")
    elif rep.when == "call":
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        prev = _CRITERIA.get(n)
        if prev is not None:
            # several tests can share one criterion: any failure wins, notes accumulate
            if prev[0] == "FAIL":
                status = "FAIL"
            notes = "; ".join(x for x in (prev[1], notes) if x)
        _CRITERIA[n] = (status, notes)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, notes = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}" + (f": {notes}" if notes else ""))

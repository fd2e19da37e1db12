import pytest

ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record an acceptance criterion's outcome for the end-of-run table."""
    entry = {"name": request.node.name, "detail": "", "passed": False}
    ACCEPTANCE.append(entry)

    def report(detail: str):
        entry["detail"] = detail

    yield report
    rep = getattr(request.node, "rep_call", None)
    entry["passed"] = bool(rep and rep.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for e in ACCEPTANCE:
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status} {e['name']}: {e['detail']}")

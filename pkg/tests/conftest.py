import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """report(n, ok, detail): record one acceptance line, then assert it."""

    def report(n, ok, detail):
        _CRITERIA[n] = (bool(ok), detail)
        assert ok, f"criterion {n}: {detail}"

    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_runtest_logreport(report):
    # a criterion test that crashed before reporting still gets a FAIL line
    name = report.nodeid.rpartition("::")[2]
    if report.when == "call" and report.failed and name.startswith("test_criterion_"):
        n = int(name.split("_")[2])
        if n not in _CRITERIA or _CRITERIA[n][0]:
            _CRITERIA[n] = (False, report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash")
                            else "error")

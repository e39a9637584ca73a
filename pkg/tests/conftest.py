import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    report = outcome.get_result()
    number, title = mark.args
    results = item.config.stash[_RESULTS]
    if report.when == "setup" and report.skipped:
        results[number] = ("SKIP", title, 0.0)
    elif report.when == "call":
        verdict = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        results[number] = (verdict, title, report.duration)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, title, seconds = results[number]
        terminalreporter.write_line(f"criterion {number:>2} {verdict}  {title}  ({seconds:.1f} s)")

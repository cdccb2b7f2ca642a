from importlib.resources import files

import pytest

DATA = files("gravirrev") / "data"


@pytest.fixture
def data_dir():
    return DATA


_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], report.outcome == "passed", item.name))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, name in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[0].lstrip("AC"))):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({name})")

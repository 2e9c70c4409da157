import numpy as np
import pytest

from hypuio import example1, example2, solve_detectable, solve_nondetectable

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, title = mark.args
    entry = _criteria.setdefault(cid, {"title": title, "ok": True, "ran": False, "notes": []})
    if rep.when == "call":
        entry["ran"] = True
    if rep.failed:
        entry["ok"] = False
    if rep.when == "call":
        entry["notes"].extend(v for k, v in item.user_properties if k == "note")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[2:])):
        e = _criteria[cid]
        status = "PASS" if e["ok"] and e["ran"] else ("FAIL" if e["ran"] or not e["ok"] else "SKIP")
        line = f"{cid} {status}: {e['title']}"
        if e["notes"]:
            line += " [" + "; ".join(e["notes"]) + "]"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def plant1():
    return example1()


@pytest.fixture(scope="session")
def plant2():
    return example2()


@pytest.fixture(scope="session")
def design1(plant1):
    return solve_detectable(plant1, [0.1])


@pytest.fixture(scope="session")
def design2(plant2):
    return solve_nondetectable(plant2, [1.0], [1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

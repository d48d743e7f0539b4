import time

import pytest

from spinwitness.cache import ResultsCache
from spinwitness.config import DEFAULT_CONFIG
from spinwitness.tables import compute_table1, compute_table2

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str = "") -> bool:
    line = f"{criterion}: {'PASS' if passed else 'FAIL'}" + (f" ({detail})" if detail else "")
    print(line)
    ACCEPTANCE.append((criterion, passed, detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'}"
                                    + (f" ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def session_cache(tmp_path_factory):
    return ResultsCache(tmp_path_factory.mktemp("cache") / "cache.json")


@pytest.fixture(scope="session")
def table1():
    t0 = time.perf_counter()
    result = compute_table1(DEFAULT_CONFIG)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table2(session_cache):
    t0 = time.perf_counter()
    result = compute_table2(DEFAULT_CONFIG, session_cache)
    return result, time.perf_counter() - t0

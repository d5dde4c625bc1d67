from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE: dict[int, tuple[str, str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _ACCEPTANCE[n] = (title, "PASS" if rep.passed else "FAIL", details)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, verdict, details = _ACCEPTANCE[n]
        terminalreporter.write_line(f"[{verdict}] criterion {n}: {title}")
        for d in details:
            terminalreporter.write_line(f"        {d}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

"""Acceptance bookkeeping: one PASS/FAIL line per criterion at the end of the run."""

import pytest

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    if call.when == "setup" and call.excinfo is not None:
        _RESULTS[n] = (title, False)
    elif call.when == "call":
        _RESULTS[n] = (title, call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")

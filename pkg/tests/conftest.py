"""Shared pytest configuration.

After the regular summary, prints one PASS/FAIL line per acceptance
criterion.  Acceptance tests live in ``test_acceptance.py`` and are named
``test_criterion_<nn>_<label>``; parametrized variants aggregate to a
single line (any failure makes the criterion FAIL).
"""
from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::(?:\w+::)?test_criterion_(\d+)_(\w+)")

_RANK = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts: dict[int, tuple[str, str]] = {}
    for outcome, flag in (
        ("passed", "PASS"),
        ("skipped", "SKIP"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
    ):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match is None:
                continue
            number = int(match.group(1))
            label = match.group(2).split("[")[0]
            previous = verdicts.get(number)
            if previous is None or _RANK[flag] > _RANK[previous[0]]:
                verdicts[number] = (flag, label)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        flag, label = verdicts[number]
        terminalreporter.write_line(f"criterion {number:02d} {flag} - {label}")

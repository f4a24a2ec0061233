import re
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile('default', deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile('default')


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance criteria: collect sub-test outcomes per criterion number and
# print one line per criterion at the end of the run.
_CRITERION = re.compile(r'test_acceptance\.py::test_c(\d+)_')
_SUPPLEMENT = re.compile(r'test_acceptance\.py::test_supplement_')
_outcomes = {}
_supplements = []


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    supplement = _SUPPLEMENT.search(report.nodeid)
    if not (match or supplement):
        return
    if report.when == 'call' or (report.when == 'setup' and report.outcome != 'passed'):
        detail = dict(report.user_properties).get('detail', '')
        entry = (report.nodeid.split('::', 1)[1], report.outcome, detail)
        if match:
            _outcomes.setdefault(int(match.group(1)), []).append(entry)
        else:
            _supplements.append(entry)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    module = sys.modules.get('test_acceptance')
    titles = getattr(module, 'CRITERIA', {})
    tr = terminalreporter
    tr.section('acceptance criteria')
    for num in sorted(_outcomes):
        subs = _outcomes[num]
        ok = all(outcome == 'passed' for _, outcome, _ in subs)
        n_ok = sum(outcome == 'passed' for _, outcome, _ in subs)
        tr.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} "
                      f"({n_ok}/{len(subs)} sub-checks)  {titles.get(num, '')}")
        for name, outcome, detail in subs:
            tr.write_line(f"    {outcome.upper():6s} {name}  {detail}")
    if _supplements:
        tr.write_line("supplementary diagnostics (not part of any verdict):")
        for name, outcome, detail in _supplements:
            tr.write_line(f"    {outcome.upper():6s} {name}  {detail}")

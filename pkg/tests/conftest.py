import sys
from pathlib import Path

import pytest

from optba import engine
from optba.space import ParamDomain, ParamSpace

FIXTURES = Path(__file__).parent / "fixtures"

# Every trace produced in-process during the session, for the monotone-elitism audit.
ALL_TRACES = []

_original_run = engine.BeesAlgorithm.run


def _recording_run(self):
    try:
        trace = _original_run(self)
    except Exception as exc:
        if getattr(exc, "trace", None) is not None:
            ALL_TRACES.append(exc.trace)
        raise
    ALL_TRACES.append(trace)
    return trace


engine.BeesAlgorithm.run = _recording_run


def assert_monotone(trace):
    fits = [trace.initial_best.fitness] if trace.initial_best else []
    fits += [r.best_so_far.fitness for r in trace.reports]
    assert all(b >= a for a, b in zip(fits, fits[1:])), fits


@pytest.fixture(autouse=True)
def _monotone_elitism_audit():
    start = len(ALL_TRACES)
    yield
    for trace in ALL_TRACES[start:]:
        assert_monotone(trace)


@pytest.fixture
def paper_space():
    return ParamSpace([ParamDomain("epochs", 1, 100), ParamDomain("units", 16, 256)])


@pytest.fixture
def grid20():
    return ParamSpace([ParamDomain("x", 0, 19), ParamDomain("y", 0, 19)])


@pytest.fixture
def python():
    return sys.executable


# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][2:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")

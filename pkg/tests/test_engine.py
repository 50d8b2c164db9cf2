import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optba.engine import (BAConfig, BeesAlgorithm, Evaluator, StoppingCriteria, global_search, initialize,
                          local_search_site, run, sort_population, validate)
from optba.errors import InvalidConfig, ObjectiveFailure
from optba.objectives import DEFAULT_SPACE, CountingObjective, MultimodalSurface, UnimodalSurface, memoized
from optba.space import ParamDomain, ParamSpace
from optba.trace import Candidate, RunTrace

PAPER = BAConfig(n=10, m=7, e=3, nep=4, nsp=1, ngh=1)


def default_surface():
    return UnimodalSurface((49, 108), 0.9963, (2e-5, 1e-6))


def stopping(**kw):
    kw.setdefault("patience", None)
    return StoppingCriteria(**kw)


# validate ------------------------------------------------------------------

def test_paper_config_has_no_warnings():
    assert validate(PAPER) == []
    assert PAPER.evaluations_per_iteration == 19


@pytest.mark.parametrize("kw, msg", [
    (dict(n=5, m=6), "m ≤ n"),
    (dict(e=5, m=3), "e ≤ m"),
    (dict(nep=0), "nep"),
    (dict(ngh=0), "ngh"),
    (dict(n=0, m=0, e=0), "ba.n"),
])
def test_hard_violations(kw, msg):
    with pytest.raises(InvalidConfig, match=msg):
        validate(BAConfig(**kw))


def test_nep_not_above_nsp_warns():
    (w,) = validate(BAConfig(nep=1, nsp=1))
    assert "nep ≤ nsp" in w


def test_stopping_must_be_finite():
    with pytest.raises(InvalidConfig):
        validate(BAConfig(stopping=StoppingCriteria(max_iterations=0)))


# sort ------------------------------------------------------------------------

def test_sort_descending():
    pop = [Candidate((1,), 0.3, 1), Candidate((2,), 0.9, 2), Candidate((3,), 0.5, 3)]
    assert [c.fitness for c in sort_population(pop)] == [0.9, 0.5, 0.3]


def test_sort_tie_breaks():
    assert sort_population([Candidate((2,), 0.5, 1), Candidate((1,), 0.5, 2)])[0].params == (1,)
    assert sort_population([Candidate((1,), 0.5, 9), Candidate((1,), 0.5, 4)])[0].eval_id == 4


# phases ----------------------------------------------------------------------

def test_initialize_counts_and_single_point():
    obj = CountingObjective(default_surface())
    pop = initialize(DEFAULT_SPACE, 10, np.random.default_rng(0), Evaluator(obj))
    assert len(pop) == 10 and obj.count == 10
    sp = ParamSpace([ParamDomain("epochs", 49, 49), ParamDomain("units", 108, 108)])
    pop = initialize(sp, 3, np.random.default_rng(0), Evaluator(default_surface()))
    assert {c.params for c in pop} == {(49, 108)} and len({c.fitness for c in pop}) == 1


def test_initialize_deterministic():
    def pop(seed):
        cands = initialize(DEFAULT_SPACE, 10, np.random.default_rng(seed), Evaluator(default_surface()))
        return json.dumps([c.to_json(DEFAULT_SPACE.names) for c in cands])

    assert pop(123) == pop(123)


def fixed(values):
    """Evaluator stand-in returning preset fitness values in order."""
    it = iter(values)
    counter = iter(range(100, 10**6))
    return lambda vecs: [Candidate(tuple(v), next(it), next(counter)) for v in vecs]


def test_local_search_keeps_site_when_recruits_worse(paper_space):
    site = Candidate((49, 108), 0.99, 1)
    out = local_search_site(site, 4, paper_space, 1, np.random.default_rng(0), fixed([0.98, 0.97, 0.5, 0.98]))
    assert out is site


def test_local_search_takes_better_recruit(paper_space):
    site = Candidate((49, 108), 0.90, 1)
    out = local_search_site(site, 4, paper_space, 1, np.random.default_rng(0), fixed([0.5, 0.95, 0.6, 0.7]))
    assert out.fitness == 0.95 and out.params != site.params
    assert max(abs(a - b) for a, b in zip(out.params, site.params)) == 1


def test_local_search_deterministic(paper_space):
    site = Candidate((40, 100), default_surface()((40, 100)), 1)

    def once():
        return local_search_site(site, 4, paper_space, 1, np.random.default_rng(8), Evaluator(default_surface()))

    assert once() == once()


def test_global_search_counts(paper_space):
    obj = CountingObjective(default_surface())
    assert global_search(0, paper_space, np.random.default_rng(0), Evaluator(obj)) == []
    assert obj.count == 0
    assert len(global_search(3, paper_space, np.random.default_rng(0), Evaluator(obj))) == 3
    assert obj.count == 3


def test_global_search_covers_space():
    sp = ParamSpace([ParamDomain("x", 0, 9)])
    counts = np.zeros(10, int)
    for seed in range(2000):
        for c in global_search(5, sp, np.random.default_rng(seed), Evaluator(lambda v, i: 0.0)):
            counts[c.params[0]] += 1
    assert counts.min() >= 800 and counts.max() <= 1200


# step / run ------------------------------------------------------------------

def test_step_accounting_and_population_size():
    ba = BeesAlgorithm(DEFAULT_SPACE, PAPER, default_surface())
    ba.initialize()
    for _ in range(5):
        rep = ba.step()
        assert rep.evaluations_this_iter == 19
        assert len(ba.population) == 10


def test_degenerate_hill_climber():
    cfg = BAConfig(n=1, m=1, e=1, nep=1, nsp=1, stopping=stopping(max_iterations=30), seed=4)
    trace = run(DEFAULT_SPACE, cfg, default_surface(), snapshots=True)
    assert all(r.evaluations_this_iter == 1 for r in trace.reports)
    pop_fits = [r.population_best.fitness for r in trace.reports]
    assert pop_fits == sorted(pop_fits)
    assert all(r.population_best == r.best_so_far for r in trace.reports)


def test_best_so_far_monotone_seed_42():
    cfg = BAConfig(stopping=stopping(max_iterations=60), seed=42)
    trace = run(DEFAULT_SPACE, cfg, default_surface())
    fits = [r.best_so_far.fitness for r in trace.reports]
    assert all(b >= a for a, b in zip(fits, fits[1:]))


def test_single_point_space_target_and_patience():
    sp = ParamSpace([ParamDomain("epochs", 49, 49), ParamDomain("units", 108, 108)])
    cfg = BAConfig(stopping=StoppingCriteria(max_iterations=50, target_fitness=0.9963))
    trace = run(sp, cfg, default_surface())
    assert (trace.stop_reason, trace.total_evaluations, trace.iterations) == ("TargetReached", 10, 0)
    assert trace.best.params == (49, 108)


def test_single_point_space_cannot_iterate():
    # no neighbor exists, so local search signals the degenerate space
    from optba.errors import NeighborhoodEmpty
    sp = ParamSpace([ParamDomain("epochs", 49, 49)])
    with pytest.raises(NeighborhoodEmpty):
        run(sp, BAConfig(stopping=stopping(max_iterations=3)), UnimodalSurface((49,), 0.5, (1e-3,)))


def test_max_iterations_accounting():
    cfg = BAConfig(stopping=stopping(max_iterations=5), seed=1)
    trace = run(DEFAULT_SPACE, cfg, default_surface())
    assert trace.stop_reason == "MaxIterations"
    assert trace.iterations == 5 and trace.total_evaluations == 10 + 5 * 19 == 105
    assert trace.total_evaluations == trace.initial_evaluations + sum(r.evaluations_this_iter for r in trace.reports)


def test_paper_config_reaches_planted_optimum():
    cfg = BAConfig(stopping=StoppingCriteria(max_iterations=100, target_fitness=0.9963), seed=42)
    trace = run(DEFAULT_SPACE, cfg, default_surface())
    assert trace.stop_reason == "TargetReached" and trace.best.params == (49, 108)


def test_patience_fires_on_flat_objective():
    cfg = BAConfig(stopping=StoppingCriteria(max_iterations=100, patience=4), seed=0)
    trace = run(DEFAULT_SPACE, cfg, lambda v, i: 0.5)
    assert trace.stop_reason == "Patience" and trace.iterations == 4


def test_patience_epsilon_ignores_tiny_gains():
    gains = iter(range(10**6))
    cfg = BAConfig(stopping=StoppingCriteria(max_iterations=100, patience=3, improvement_epsilon=1.0))
    trace = run(DEFAULT_SPACE, cfg, lambda v, i: next(gains) * 1e-6)
    assert trace.stop_reason == "Patience" and trace.iterations == 3


def test_best_is_max_of_everything_evaluated():
    seen = []

    def obj(v, i):
        f = default_surface()(v)
        seen.append(Candidate(tuple(v), f, i))
        return f

    trace = run(DEFAULT_SPACE, BAConfig(stopping=stopping(max_iterations=10), seed=3), obj)
    assert trace.best == sort_population(seen)[0]
    assert trace.distinct_evaluations == len({c.params for c in seen})
    assert all(DEFAULT_SPACE.contains(c.params) for c in seen)


@pytest.mark.parametrize("bad", [math.nan, math.inf, "x"])
def test_non_finite_fitness_is_failure_with_partial_trace(bad):
    calls = iter(range(10**6))

    def obj(v, i):
        return bad if next(calls) == 40 else 0.5

    with pytest.raises(ObjectiveFailure) as info:
        run(DEFAULT_SPACE, BAConfig(stopping=stopping(max_iterations=10)), obj)
    exc = info.value
    assert exc.eval_id == 41 and DEFAULT_SPACE.contains(exc.params)
    assert exc.trace is not None and exc.trace.stop_reason is None and exc.trace.iterations == 1


def test_objective_exception_wrapped():
    def obj(v, i):
        raise RuntimeError("trainer crashed")

    with pytest.raises(ObjectiveFailure, match="trainer crashed"):
        run(DEFAULT_SPACE, BAConfig(), obj)


def test_memoized_single_point_invokes_inner_once():
    sp = ParamSpace([ParamDomain("epochs", 49, 49), ParamDomain("units", 100, 101)])
    inner = CountingObjective(default_surface())
    trace = run(sp, BAConfig(stopping=stopping(max_iterations=20)), memoized(inner))
    assert inner.count == 2  # two grid points, each computed once
    assert trace.total_evaluations == 10 + 20 * 19
    assert trace.distinct_evaluations == 2


@pytest.mark.parametrize("workers", [2, 8])
def test_trace_independent_of_workers(workers):
    surf = MultimodalSurface((15, 14), 0.99, (1e-3, 1e-3),
                             [{"center": (3, 4)}, {"center": (4, 16)}],
                             space=ParamSpace([ParamDomain("x", 0, 19), ParamDomain("y", 0, 19)]))
    sp = ParamSpace([ParamDomain("x", 0, 19), ParamDomain("y", 0, 19)])
    cfg = BAConfig(stopping=stopping(max_iterations=15), seed=99)
    a = run(sp, cfg, surf, snapshots=True).dumps()
    b = run(sp, cfg, surf, snapshots=True, workers=workers).dumps()
    assert a == b


def test_trace_json_roundtrip():
    trace = run(DEFAULT_SPACE, BAConfig(stopping=stopping(max_iterations=4), seed=2), default_surface(),
                snapshots=True)
    again = RunTrace.from_json(json.loads(trace.dumps()))
    assert again.dumps() == trace.dumps()
    rows = trace.to_csv().splitlines()
    assert rows[0] == "iteration,evaluations_cum,best_fitness,epochs,units"
    assert rows[1].startswith("0,29,") and rows[-1].startswith("3,86,")


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 8), m_frac=st.floats(0, 1), e_frac=st.floats(0, 1),
    nep=st.integers(1, 4), nsp=st.integers(1, 3), ngh=st.integers(1, 3), seed=st.integers(0, 2**64 - 1),
)
def test_invariants_random_configs(n, m_frac, e_frac, nep, nsp, ngh, seed):
    m = max(1, round(m_frac * n))
    e = max(1, round(e_frac * m))
    cfg = BAConfig(n=n, m=m, e=e, nep=nep, nsp=nsp, ngh=ngh, stopping=stopping(max_iterations=8), seed=seed)
    sp = ParamSpace([ParamDomain("a", 0, 12), ParamDomain("b", -5, 5, 5)])
    surf = UnimodalSurface((7, 0), 0.8, (1e-2, 1e-3))
    ba = BeesAlgorithm(sp, cfg, surf)
    trace = ba.run()
    for r in trace.reports:
        assert r.evaluations_this_iter == cfg.evaluations_per_iteration
    assert len(ba.population) == n
    assert trace.total_evaluations == n + sum(r.evaluations_this_iter for r in trace.reports)
    fits = [trace.initial_best.fitness] + [r.best_so_far.fitness for r in trace.reports]
    assert fits == sorted(fits)

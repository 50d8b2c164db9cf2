"""Paired-seed comparisons of the Bees Algorithm against random and grid search.

For each trial ``i`` the BA seed is ``trial_seed(master, i)``; random search
draws from its own stream ``trial_seed(ba_seed, 1)`` and receives exactly as
many evaluations as the paired BA run consumed.  Grid search evaluates the whole space once and doubles as the
oracle that decides whether a trial found the global argmax.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine
from .engine import BAConfig, Evaluator
from .objectives import ObjectiveSpec, build_objective
from .space import DEFAULT_ENUMERATION_LIMIT, ParamSpace, enumerate_grid, sample_uniform
from .errors import InvalidConfig, SpaceTooLarge
from .trace import Candidate

METHODS = ("ba", "random", "grid")
BASELINES = ("random", "grid")
BUDGET_MODES = ("match_total_evaluations", "match_iterations")
_BASELINE_ALIASES = {"RandomSearch": "random", "GridSearch": "grid"}
_BUDGET_ALIASES = {"MatchTotalEvaluations": "match_total_evaluations", "MatchIterations": "match_iterations"}


def trial_seed(master: int, trial: int) -> int:
    """Mix ``(master, trial)`` through numpy's SeedSequence hash into a 64-bit seed."""
    return int(np.random.SeedSequence([int(master), int(trial)]).generate_state(1, np.uint64)[0])


@dataclass
class SearchResult:
    """Outcome of one optimizer run, reduced to what the comparison needs."""

    method: str
    seed: Optional[int]
    best: Candidate
    total_evaluations: int
    curve: list = field(default_factory=list)  # best fitness after each evaluation batch


def run_random_search(space: ParamSpace, budget: int, seed: int, objective, workers: int = 1) -> SearchResult:
    """Evaluate ``budget`` independent uniform samples (with replacement)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    evaluate = Evaluator(objective, workers)
    try:
        curve = []
        for c in evaluate([sample_uniform(space, rng) for _ in range(budget)]):
            curve.append(max(curve[-1], c.fitness) if curve else c.fitness)
    finally:
        evaluate.close()
    return SearchResult("random", seed, evaluate.best, evaluate.issued, curve)


def run_grid_search(space: ParamSpace, objective, limit: int = DEFAULT_ENUMERATION_LIMIT,
                    workers: int = 1) -> SearchResult:
    """Evaluate every grid point once; ``best`` is the true argmax under the sort tie-break."""
    points = list(enumerate_grid(space, limit))
    evaluate = Evaluator(objective, workers)
    try:
        evaluate(points)
    finally:
        evaluate.close()
    return SearchResult("grid", None, evaluate.best, evaluate.issued)


@dataclass
class ExperimentConfig:
    space: ParamSpace
    objective: ObjectiveSpec
    ba: BAConfig
    baselines: tuple = ("random", "grid")
    repeats: int = 10
    budget_mode: str = "match_total_evaluations"

    def __post_init__(self):
        self.baselines = tuple(_BASELINE_ALIASES.get(b, b) for b in self.baselines)
        bad = [b for b in self.baselines if b not in BASELINES]
        if bad:
            raise InvalidConfig(f"experiment.baselines: unknown {bad}; choose from {list(BASELINES)}")
        self.budget_mode = _BUDGET_ALIASES.get(self.budget_mode, self.budget_mode)
        if self.budget_mode not in BUDGET_MODES:
            raise InvalidConfig(f"experiment.budget_mode must be one of {list(BUDGET_MODES)}")
        if isinstance(self.repeats, bool) or not isinstance(self.repeats, int) or self.repeats < 1:
            raise InvalidConfig("experiment.repeats must be an integer >= 1")

    def to_json(self) -> dict:
        return {"baselines": list(self.baselines), "repeats": self.repeats, "budget_mode": self.budget_mode}


@dataclass
class TrialRecord:
    trial: int
    method: str
    seed: Optional[int]
    total_evaluations: int
    best: Candidate
    success: Optional[bool]
    evals_to_optimum: Optional[int]


@dataclass
class MethodStats:
    trials: int
    mean: float
    std: float
    median: float
    min: float
    max: float
    success_rate: Optional[float]
    mean_evals_to_optimum: Optional[float]


def summarize(records) -> MethodStats:
    fits = np.array([r.best.fitness for r in records], dtype=float)
    known = [r for r in records if r.success is not None]
    hits = [r for r in known if r.success]
    return MethodStats(
        trials=len(records),
        mean=float(fits.mean()),
        std=float(fits.std(ddof=1)) if len(fits) > 1 else 0.0,
        median=float(np.median(fits)),
        min=float(fits.min()),
        max=float(fits.max()),
        success_rate=len(hits) / len(known) if known else None,
        mean_evals_to_optimum=float(np.mean([r.evals_to_optimum for r in hits])) if hits else None,
    )


@dataclass
class Comparison:
    names: tuple
    oracle: Optional[Candidate]
    records: list
    summary: dict  # method -> MethodStats

    def trials_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "method", "seed", "total_evaluations", "best_fitness", "success",
                    "evals_to_optimum", *self.names])
        for r in sorted(self.records, key=lambda r: (r.trial, METHODS.index(r.method))):
            w.writerow([
                r.trial, r.method, "" if r.seed is None else r.seed, r.total_evaluations,
                repr(r.best.fitness), "" if r.success is None else str(r.success).lower(),
                "" if r.evals_to_optimum is None else r.evals_to_optimum, *r.best.params,
            ])
        return buf.getvalue()

    def summary_json(self) -> dict:
        return {
            "oracle": None if self.oracle is None else self.oracle.to_json(self.names),
            "methods": {m: vars(s) for m, s in self.summary.items()},
        }

    def dumps_summary(self) -> str:
        return json.dumps(self.summary_json(), indent=2) + "\n"

    def table(self) -> str:
        lines = [f"{'method':<8} {'trials':>6} {'mean':>10} {'std':>10} {'median':>10} {'min':>10} "
                 f"{'max':>10} {'success':>8} {'evals→opt':>10}"]
        for m, s in self.summary.items():
            sr = "n/a" if s.success_rate is None else f"{s.success_rate:.3f}"
            ev = "n/a" if s.mean_evals_to_optimum is None else f"{s.mean_evals_to_optimum:.1f}"
            lines.append(f"{m:<8} {s.trials:>6} {s.mean:>10.6f} {s.std:>10.6f} {s.median:>10.6f} "
                         f"{s.min:>10.6f} {s.max:>10.6f} {sr:>8} {ev:>10}")
        return "\n".join(lines)


def _record(trial, result: SearchResult, oracle: Optional[Candidate]) -> TrialRecord:
    if oracle is None:
        success, to_opt = None, None
    else:
        success = result.best.params == oracle.params
        # best carries the earliest eval_id among equal params, i.e. the first hit
        to_opt = result.best.eval_id if success else None
    return TrialRecord(trial, result.method, result.seed, result.total_evaluations, result.best, success, to_opt)


def compare(config: ExperimentConfig, workers: int = 1, oracle_limit: int = DEFAULT_ENUMERATION_LIMIT,
            on_trial=None) -> Comparison:
    """Run ``repeats`` paired trials of BA and each baseline, then aggregate."""
    space, spec = config.space, config.objective
    engine.validate(config.ba)
    grid = None
    oracle = None
    # external trainers are too expensive to enumerate unless grid search was asked for
    if "grid" in config.baselines or spec.kind != "external":
        try:
            # the oracle is the argmax of the noise-free surface
            clean = ObjectiveSpec(spec.kind, {k: v for k, v in spec.settings.items() if k != "noise"})
            with build_objective(clean, space) as obj:
                grid = run_grid_search(space, obj, oracle_limit, workers)
            oracle = grid.best
        except SpaceTooLarge:
            if "grid" in config.baselines:
                raise
    records = []
    for i in range(config.repeats):
        seed = trial_seed(config.ba.seed, i)
        with build_objective(spec, space) as obj:
            trace = engine.run(space, config.ba.with_seed(seed), obj, workers=workers, objective_id=spec.identifier)
        ba = SearchResult("ba", seed, trace.best, trace.total_evaluations,
                          [p[1] for p in trace.best_curve()])
        records.append(_record(i, ba, oracle))
        if "random" in config.baselines:
            if config.budget_mode == "match_total_evaluations":
                budget = trace.total_evaluations
            else:
                budget = config.ba.n * (trace.iterations + 1)
            with build_objective(spec, space) as obj:
                rs = run_random_search(space, budget, trial_seed(seed, 1), obj, workers)
            records.append(_record(i, rs, oracle))
        if "grid" in config.baselines:
            records.append(_record(i, grid, oracle))
        if on_trial is not None:
            on_trial(i, records)
    summary = {}
    for m in METHODS:
        rows = [r for r in records if r.method == m]
        if rows:
            summary[m] = summarize(rows)
    return Comparison(space.names, oracle, records, summary)


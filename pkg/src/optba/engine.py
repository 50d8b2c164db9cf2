"""The Bees Algorithm over integer parameter spaces.

One iteration:

1. sort the population by fitness (descending; ties by params, then eval_id),
2. the top ``m`` bees are sites, the top ``e`` of those are elite,
3. each elite site gets ``nep`` recruits and each other site ``nsp`` recruits,
   drawn within ``ngh`` grid steps; a site is replaced only by a better recruit,
4. the remaining ``n - m`` bees are replaced by fresh uniform scouts.

All random draws happen on the calling thread in a fixed order, so a run is a
deterministic function of the seed whatever the number of evaluation workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidConfig, ObjectiveFailure
from .space import ParamSpace, neighbor, sample_uniform
from .trace import Candidate, IterationReport, RunTrace, better

log = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class StoppingCriteria:
    max_iterations: int = 100
    patience: Optional[int] = 10
    improvement_epsilon: float = 0.0
    target_fitness: Optional[float] = None

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BAConfig:
    """Control parameters; defaults are the values used for the LSTM tuning experiments."""

    n: int = 10
    m: int = 7
    e: int = 3
    nep: int = 4
    nsp: int = 1
    ngh: int = 1
    stopping: StoppingCriteria = field(default_factory=StoppingCriteria)
    seed: int = 0

    @property
    def evaluations_per_iteration(self) -> int:
        return self.e * self.nep + (self.m - self.e) * self.nsp + (self.n - self.m)

    def with_seed(self, seed: int) -> "BAConfig":
        return replace(self, seed=int(seed))

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "e": self.e, "nep": self.nep, "nsp": self.nsp,
                "ngh": self.ngh, "seed": self.seed}


def validate(config: BAConfig) -> list:
    """Check hard invariants (raising InvalidConfig) and return guideline warnings."""
    for name in ("n", "m", "e", "nep", "nsp", "ngh"):
        value = getattr(config, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise InvalidConfig(f"ba.{name} must be an integer >= 1, got {value!r}")
    if config.e > config.m:
        raise InvalidConfig(f"ba.e must satisfy e ≤ m (e={config.e}, m={config.m})")
    if config.m > config.n:
        raise InvalidConfig(f"ba.m must satisfy m ≤ n (m={config.m}, n={config.n})")
    if not isinstance(config.seed, int) or not 0 <= config.seed <= MAX_SEED:
        raise InvalidConfig(f"ba.seed must be an unsigned 64-bit integer, got {config.seed!r}")
    s = config.stopping
    if isinstance(s.max_iterations, bool) or not isinstance(s.max_iterations, int) or s.max_iterations < 1:
        raise InvalidConfig(f"stopping.max_iterations must be an integer >= 1, got {s.max_iterations!r}")
    if s.patience is not None and (not isinstance(s.patience, int) or s.patience < 1):
        raise InvalidConfig(f"stopping.patience must be an integer >= 1, got {s.patience!r}")
    if not s.improvement_epsilon >= 0:
        raise InvalidConfig("stopping.epsilon must be >= 0")
    if s.target_fitness is not None and not math.isfinite(s.target_fitness):
        raise InvalidConfig("stopping.target_fitness must be finite")
    warnings = []
    if config.nep <= config.nsp:
        warnings.append(f"nep ≤ nsp (nep={config.nep}, nsp={config.nsp}): elite sites should get more recruits")
    return warnings


class Evaluator:
    """Issues evaluations: assigns eval_ids, runs the objective, tracks the best seen.

    Within one batch evaluations may run on a thread pool; results are keyed
    by eval_id and the lowest-id failure wins, so outcomes do not depend on
    scheduling.
    """

    def __init__(self, objective: Callable, workers: int = 1):
        self.objective = objective
        self.workers = max(1, int(workers))
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None
        self.next_id = 1
        self.issued = 0
        self.distinct: set = set()
        self.best: Optional[Candidate] = None

    def _call(self, values, eval_id):
        try:
            raw = self.objective(values, eval_id)
        except ObjectiveFailure as exc:
            if exc.params is None:
                exc.params, exc.eval_id = values, eval_id
            raise
        except Exception as exc:
            raise ObjectiveFailure(f"objective raised {type(exc).__name__}: {exc}", values, eval_id) from exc
        try:
            fitness = float(raw)
        except (TypeError, ValueError):
            raise ObjectiveFailure(f"objective returned non-numeric {raw!r}", values, eval_id) from None
        if not math.isfinite(fitness):
            raise ObjectiveFailure(f"objective returned non-finite fitness {fitness!r}", values, eval_id)
        return fitness

    def __call__(self, vectors) -> list:
        vectors = [tuple(v) for v in vectors]
        ids = list(range(self.next_id, self.next_id + len(vectors)))
        self.next_id += len(vectors)
        self.issued += len(vectors)
        if self._pool is None or len(vectors) < 2:
            outcomes = []
            for v, i in zip(vectors, ids):
                outcomes.append(self._call(v, i))
        else:
            futures = [self._pool.submit(self._call, v, i) for v, i in zip(vectors, ids)]
            outcomes = [f.exception() or f.result() for f in futures]
            for o in outcomes:
                if isinstance(o, BaseException):
                    raise o
        out = []
        for v, i, fit in zip(vectors, ids, outcomes):
            c = Candidate(v, fit, i)
            self.distinct.add(v)
            if better(c, self.best):
                self.best = c
            out.append(c)
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def sort_population(pop) -> list:
    """Descending fitness; ties by ascending params, then ascending eval_id."""
    return sorted(pop, key=Candidate.sort_key)


def initialize(space: ParamSpace, n: int, rng: np.random.Generator, evaluate) -> list:
    """Draw ``n`` uniform scouts and evaluate them."""
    return evaluate([sample_uniform(space, rng) for _ in range(n)])


def local_search_site(site: Candidate, recruits: int, space: ParamSpace, ngh: int,
                      rng: np.random.Generator, evaluate) -> Candidate:
    """Evaluate ``recruits`` neighbors of ``site``; keep the fittest of site and recruits."""
    if recruits < 1:
        raise ValueError("recruits must be >= 1")
    found = evaluate([neighbor(space, site.params, ngh, rng) for _ in range(recruits)])
    return sort_population([site, *found])[0]


def global_search(count: int, space: ParamSpace, rng: np.random.Generator, evaluate) -> list:
    if count <= 0:
        return []
    return evaluate([sample_uniform(space, rng) for _ in range(count)])


class BeesAlgorithm:
    """Stateful driver: ``initialize()`` then repeated ``step()``, or just ``run()``."""

    def __init__(self, space: ParamSpace, config: BAConfig, objective, *, workers: int = 1,
                 snapshots: bool = False, objective_id: str = "", callback=None):
        self.space = space
        self.config = config
        self.warnings = validate(config)
        self.objective_id = objective_id or getattr(objective, "name", "objective")
        self.evaluate = Evaluator(objective, workers)
        self.rng = np.random.default_rng(config.seed)
        self.snapshots = snapshots
        self.callback = callback
        self.population: list = []
        self.iteration = 0

    @property
    def best(self) -> Optional[Candidate]:
        return self.evaluate.best

    def initialize(self) -> list:
        self.population = initialize(self.space, self.config.n, self.rng, self.evaluate)
        return self.population

    def step(self) -> IterationReport:
        cfg = self.config
        before = self.evaluate.issued
        ranked = sort_population(self.population)
        sites = []
        for rank, site in enumerate(ranked[: cfg.m]):
            recruits = cfg.nep if rank < cfg.e else cfg.nsp
            sites.append(local_search_site(site, recruits, self.space, cfg.ngh, self.rng, self.evaluate))
        scouts = global_search(cfg.n - cfg.m, self.space, self.rng, self.evaluate)
        self.population = sites + scouts
        report = IterationReport(
            iteration=self.iteration,
            evaluations_this_iter=self.evaluate.issued - before,
            best_so_far=self.evaluate.best,
            population_best=sort_population(self.population)[0],
            population_snapshot=sort_population(self.population) if self.snapshots else None,
        )
        self.iteration += 1
        return report

    def _new_trace(self) -> RunTrace:
        return RunTrace(
            names=self.space.names,
            config={"space": self.space.to_json(), "ba": self.config.to_json(),
                    "stopping": self.config.stopping.to_json()},
            objective=self.objective_id,
            initial_evaluations=self.config.n,
            warnings=list(self.warnings),
        )

    def _finish(self, trace: RunTrace, reason):
        trace.stop_reason = reason
        trace.total_evaluations = self.evaluate.issued
        trace.distinct_evaluations = len(self.evaluate.distinct)
        trace.best = self.evaluate.best
        return trace

    def run(self) -> RunTrace:
        stop = self.config.stopping
        trace = self._new_trace()
        try:
            self.initialize()
            trace.initial_best = self.evaluate.best
            if stop.target_fitness is not None and self.best.fitness >= stop.target_fitness:
                return self._finish(trace, "TargetReached")
            reference = self.best.fitness
            stale = 0
            while True:
                report = self.step()
                trace.reports.append(report)
                if self.callback is not None:
                    self.callback(report)
                best = report.best_so_far.fitness
                if best - reference > stop.improvement_epsilon:
                    reference, stale = best, 0
                else:
                    stale += 1
                if stop.target_fitness is not None and best >= stop.target_fitness:
                    return self._finish(trace, "TargetReached")
                if stop.patience is not None and stale >= stop.patience:
                    return self._finish(trace, "Patience")
                if len(trace.reports) >= stop.max_iterations:
                    return self._finish(trace, "MaxIterations")
        except ObjectiveFailure as exc:
            self._finish(trace, None)
            trace.error = str(exc)
            exc.trace = trace
            raise
        finally:
            self.evaluate.close()


def run(space: ParamSpace, config: BAConfig, objective, **kwargs) -> RunTrace:
    """Run the Bees Algorithm to a stopping criterion and return its trace.

    On ObjectiveFailure the exception carries the partial trace as ``exc.trace``.
    """
    return BeesAlgorithm(space, config, objective, **kwargs).run()

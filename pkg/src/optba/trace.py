"""Candidates, per-iteration reports and run traces, with JSON/CSV writers.

Both output formats are byte-stable for a fixed seed: JSON is written with a
fixed key order and floats use Python's shortest round-trip repr.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

STOP_REASONS = ("MaxIterations", "Patience", "TargetReached")


@dataclass(frozen=True)
class Candidate:
    """One bee: a parameter tuple, its fitness and the evaluation that produced it."""

    params: tuple
    fitness: float
    eval_id: int

    def sort_key(self):
        # descending fitness, then ascending params, then ascending eval_id
        return (-self.fitness, self.params, self.eval_id)

    def to_json(self, names) -> dict:
        return {
            "params": dict(zip(names, self.params)),
            "fitness": self.fitness,
            "eval_id": self.eval_id,
        }

    @classmethod
    def from_json(cls, obj, names) -> "Candidate":
        return cls(tuple(int(obj["params"][n]) for n in names), float(obj["fitness"]), int(obj["eval_id"]))


def better(a: Candidate, b: Optional[Candidate]) -> bool:
    """True when ``a`` ranks strictly ahead of ``b`` under the population sort order."""
    return b is None or a.sort_key() < b.sort_key()


@dataclass
class IterationReport:
    iteration: int
    evaluations_this_iter: int
    best_so_far: Candidate
    population_best: Candidate
    population_snapshot: Optional[list] = None

    def to_json(self, names) -> dict:
        out = {
            "iteration": self.iteration,
            "evaluations_this_iter": self.evaluations_this_iter,
            "best_so_far": self.best_so_far.to_json(names),
            "population_best": self.population_best.to_json(names),
        }
        if self.population_snapshot is not None:
            out["population"] = [c.to_json(names) for c in self.population_snapshot]
        return out


@dataclass
class RunTrace:
    """Everything needed to audit and replay one optimization run."""

    names: tuple
    config: dict
    objective: str
    initial_evaluations: int
    initial_best: Optional[Candidate] = None
    reports: list = field(default_factory=list)
    stop_reason: Optional[str] = None
    total_evaluations: int = 0
    distinct_evaluations: int = 0
    best: Optional[Candidate] = None
    warnings: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def iterations(self) -> int:
        return len(self.reports)

    def best_curve(self):
        """``(evaluations_cum, best_fitness)`` pairs, starting after initialization."""
        points = []
        if self.initial_best is not None:
            points.append((self.initial_evaluations, self.initial_best.fitness))
        cum = self.initial_evaluations
        for r in self.reports:
            cum += r.evaluations_this_iter
            points.append((cum, r.best_so_far.fitness))
        return points

    def to_json(self) -> dict:
        names = self.names
        out = {
            "config": self.config,
            "objective": self.objective,
            "warnings": list(self.warnings),
            "initial_evaluations": self.initial_evaluations,
            "initial_best": self.initial_best.to_json(names) if self.initial_best else None,
            "reports": [r.to_json(names) for r in self.reports],
            "stop_reason": self.stop_reason,
            "total_evaluations": self.total_evaluations,
            "distinct_evaluations": self.distinct_evaluations,
            "best": self.best.to_json(names) if self.best else None,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def to_csv(self) -> str:
        """Convergence trace: ``iteration,evaluations_cum,best_fitness,<param>...``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "evaluations_cum", "best_fitness", *self.names])
        cum = self.initial_evaluations
        for r in self.reports:
            cum += r.evaluations_this_iter
            w.writerow([r.iteration, cum, repr(r.best_so_far.fitness), *r.best_so_far.params])
        return buf.getvalue()

    @classmethod
    def from_json(cls, obj) -> "RunTrace":
        names = tuple(d["name"] for d in obj["config"]["space"])

        def cand(c):
            return Candidate.from_json(c, names) if c else None

        reports = [
            IterationReport(
                r["iteration"], r["evaluations_this_iter"], cand(r["best_so_far"]), cand(r["population_best"]),
                [cand(c) for c in r["population"]] if "population" in r else None,
            )
            for r in obj["reports"]
        ]
        return cls(
            names=names, config=obj["config"], objective=obj["objective"],
            initial_evaluations=obj["initial_evaluations"], initial_best=cand(obj["initial_best"]),
            reports=reports, stop_reason=obj["stop_reason"], total_evaluations=obj["total_evaluations"],
            distinct_evaluations=obj["distinct_evaluations"], best=cand(obj["best"]),
            warnings=obj.get("warnings", []), error=obj.get("error"),
        )

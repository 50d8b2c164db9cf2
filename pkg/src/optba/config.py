"""Load the single JSON run/experiment config file.

Top-level keys: ``space`` (list of domains), ``objective`` (kind + settings),
``ba`` (n, m, e, nep, nsp, ngh, seed), ``stopping`` (max_iterations,
patience, epsilon, target_fitness) and, for benchmarks, ``experiment``
(baselines, repeats, budget_mode).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .engine import BAConfig, StoppingCriteria, validate
from .errors import InvalidConfig
from .harness import ExperimentConfig
from .objectives import ObjectiveSpec
from .space import ParamSpace

TOP_LEVEL_KEYS = {"space", "objective", "ba", "stopping", "experiment"}
BA_KEYS = {"n", "m", "e", "nep", "nsp", "ngh", "seed"}
STOPPING_KEYS = {"max_iterations", "patience", "epsilon", "target_fitness"}
EXPERIMENT_KEYS = {"baselines", "repeats", "budget_mode"}


class ConfigError(InvalidConfig):
    pass


@dataclass
class RunConfig:
    space: ParamSpace
    objective: ObjectiveSpec
    ba: BAConfig
    experiment: Optional[ExperimentConfig] = None
    warnings: tuple = ()

    def to_json(self) -> dict:
        """Effective configuration with every default written out."""
        s = self.ba.stopping
        out = {
            "space": self.space.to_json(),
            "objective": self.objective.resolved(self.space).to_json(),
            "ba": self.ba.to_json(),
            "stopping": {"max_iterations": s.max_iterations, "patience": s.patience,
                         "epsilon": s.improvement_epsilon, "target_fitness": s.target_fitness},
        }
        if self.experiment is not None:
            out["experiment"] = self.experiment.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def _section(raw, key, allowed):
    sec = raw.get(key, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{key} must be an object")
    unknown = sorted(set(sec) - allowed)
    if unknown:
        raise ConfigError(f"{key}: unknown keys {unknown}")
    return sec


def _int(sec, section, key, default):
    value = sec.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return value


def _opt_number(sec, section, key, default):
    value = sec.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    return value


def parse_config(raw: dict, seed: Optional[int] = None, experiment: bool = False) -> RunConfig:
    """Validate a decoded config document; ``seed`` overrides ``ba.seed``."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    if "space" not in raw:
        raise ConfigError("space is required")
    try:
        space = ParamSpace.from_json(raw["space"])
    except InvalidConfig as exc:
        raise ConfigError(f"space: {exc}") from None
    try:
        spec = ObjectiveSpec.from_json(raw.get("objective"))
        spec.resolved(space)
    except InvalidConfig as exc:
        raise ConfigError(str(exc) if str(exc).startswith("objective") else f"objective: {exc}") from None

    st = _section(raw, "stopping", STOPPING_KEYS)
    patience = st["patience"] if "patience" in st else StoppingCriteria.patience
    if patience is not None and (isinstance(patience, bool) or not isinstance(patience, int)):
        raise ConfigError(f"stopping.patience must be an integer or null, got {patience!r}")
    stopping = StoppingCriteria(
        max_iterations=_int(st, "stopping", "max_iterations", StoppingCriteria.max_iterations),
        patience=patience,
        improvement_epsilon=float(_opt_number(st, "stopping", "epsilon", 0.0) or 0.0),
        target_fitness=_opt_number(st, "stopping", "target_fitness", None),
    )

    b = _section(raw, "ba", BA_KEYS)
    d = BAConfig()
    ba = BAConfig(
        n=_int(b, "ba", "n", d.n), m=_int(b, "ba", "m", d.m), e=_int(b, "ba", "e", d.e),
        nep=_int(b, "ba", "nep", d.nep), nsp=_int(b, "ba", "nsp", d.nsp), ngh=_int(b, "ba", "ngh", d.ngh),
        stopping=stopping,
        seed=seed if seed is not None else _int(b, "ba", "seed", d.seed),
    )
    try:
        warnings = validate(ba)
    except InvalidConfig as exc:
        raise ConfigError(str(exc)) from None

    exp = None
    if experiment or "experiment" in raw:
        x = _section(raw, "experiment", EXPERIMENT_KEYS)
        baselines = x.get("baselines", ["random", "grid"])
        if not isinstance(baselines, list):
            raise ConfigError("experiment.baselines must be a list")
        try:
            exp = ExperimentConfig(space, spec, ba, tuple(baselines), _int(x, "experiment", "repeats", 10),
                                   x.get("budget_mode", "match_total_evaluations"))
        except InvalidConfig as exc:
            raise ConfigError(str(exc)) from None
    return RunConfig(space, spec, ba, exp, tuple(warnings))


def load_config(path, seed: Optional[int] = None, experiment: bool = False) -> RunConfig:
    """Read and validate a config file.

    Raises:
        ConfigError: on unreadable JSON (message carries line and column) or invalid fields.
        OSError: if the file cannot be read.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(raw, seed, experiment)

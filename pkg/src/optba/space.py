"""Integer hyperparameter domains, uniform sampling and grid neighborhoods.

A point in a :class:`ParamSpace` is a plain ``tuple`` of ints aligned with
``space.domains``.  Random operations take a ``numpy.random.Generator`` and
consume one bounded-integer draw per coordinate per attempt, so sequences are
reproducible from the generator seed alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidSpace, NeighborhoodEmpty, SpaceTooLarge

ParamVector = tuple  # tuple[int, ...]

DEFAULT_ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True)
class ParamDomain:
    name: str
    lower: int
    upper: int
    step: int = 1

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InvalidSpace("domain name must be a non-empty string")
        for attr in ("lower", "upper", "step"):
            value = getattr(self, attr)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidSpace(f"{self.name}.{attr} must be an integer, got {value!r}")
            object.__setattr__(self, attr, int(value))
        if self.lower > self.upper:
            raise InvalidSpace(f"{self.name}: lower ({self.lower}) > upper ({self.upper})")
        if self.step < 1:
            raise InvalidSpace(f"{self.name}: step must be >= 1")
        if (self.upper - self.lower) % self.step:
            raise InvalidSpace(
                f"{self.name}: upper - lower ({self.upper - self.lower}) is not a multiple of step {self.step}"
            )

    @property
    def size(self) -> int:
        return (self.upper - self.lower) // self.step + 1

    def contains(self, value: int) -> bool:
        return self.lower <= value <= self.upper and (value - self.lower) % self.step == 0

    def grid(self) -> range:
        return range(self.lower, self.upper + 1, self.step)

    def to_dict(self) -> dict:
        return {"name": self.name, "lower": self.lower, "upper": self.upper, "step": self.step}


@dataclass(frozen=True)
class ParamSpace:
    domains: tuple

    def __init__(self, domains: Sequence[ParamDomain]):
        domains = tuple(domains)
        if not domains:
            raise InvalidSpace("a parameter space needs at least one domain")
        names = [d.name for d in domains]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise InvalidSpace(f"duplicate domain names: {', '.join(dupes)}")
        object.__setattr__(self, "domains", domains)

    @classmethod
    def from_json(cls, items) -> "ParamSpace":
        """Build from the config-file form: a list of ``{"name", "lower", "upper", "step"?}``."""
        if not isinstance(items, list):
            raise InvalidSpace("space must be a JSON array of domain objects")
        domains = []
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                raise InvalidSpace(f"space[{i}] must be an object")
            unknown = set(item) - {"name", "lower", "upper", "step"}
            if unknown:
                raise InvalidSpace(f"space[{i}]: unknown keys {sorted(unknown)}")
            for key in ("name", "lower", "upper"):
                if key not in item:
                    raise InvalidSpace(f"space[{i}].{key} is required")
            domains.append(ParamDomain(item["name"], item["lower"], item["upper"], item.get("step", 1)))
        return cls(domains)

    def to_json(self) -> list:
        return [d.to_dict() for d in self.domains]

    @property
    def names(self) -> tuple:
        return tuple(d.name for d in self.domains)

    @property
    def ndim(self) -> int:
        return len(self.domains)

    @property
    def cardinality(self) -> int:
        # python ints do not overflow
        return math.prod(d.size for d in self.domains)

    def contains(self, vector) -> bool:
        return len(vector) == len(self.domains) and all(
            d.contains(v) for d, v in zip(self.domains, vector)
        )

    def validate(self, vector) -> ParamVector:
        if len(vector) != len(self.domains):
            raise InvalidSpace(f"expected {len(self.domains)} values, got {len(vector)}")
        for d, v in zip(self.domains, vector):
            if not d.contains(v):
                raise InvalidSpace(f"{d.name}={v} is outside [{d.lower}, {d.upper}] step {d.step}")
        return tuple(int(v) for v in vector)

    def as_dict(self, vector) -> dict:
        return dict(zip(self.names, (int(v) for v in vector)))

    def from_dict(self, mapping: dict) -> ParamVector:
        missing = [n for n in self.names if n not in mapping]
        if missing:
            raise InvalidSpace(f"missing values for {', '.join(missing)}")
        extra = sorted(set(mapping) - set(self.names))
        if extra:
            raise InvalidSpace(f"unknown parameters {', '.join(extra)}")
        return self.validate(tuple(mapping[n] for n in self.names))


def sample_uniform(space: ParamSpace, rng: np.random.Generator) -> ParamVector:
    """Draw each coordinate independently and uniformly from its grid."""
    return tuple(d.lower + d.step * int(rng.integers(d.size)) for d in space.domains)


def _neighborhood_options(space: ParamSpace, center, ngh: int) -> list:
    options = []
    for d, c in zip(space.domains, center):
        lo = max(d.lower, c - ngh * d.step)
        hi = min(d.upper, c + ngh * d.step)
        options.append(range(lo, hi + 1, d.step))
    return options


def neighbor(space: ParamSpace, center, ngh: int, rng: np.random.Generator) -> ParamVector:
    """Sample a point within ``ngh`` grid steps of ``center`` on every coordinate.

    Each coordinate is drawn uniformly from the in-bounds points of
    ``center_i + k * step`` with ``|k| <= ngh`` (out-of-range points are dropped,
    not clamped).  Draws equal to ``center`` are rejected and redrawn.

    Raises:
        NeighborhoodEmpty: if no coordinate can move, e.g. all domains are single points.
    """
    if ngh < 1:
        raise ValueError("ngh must be >= 1")
    center = tuple(center)
    options = _neighborhood_options(space, center, ngh)
    if all(len(opt) == 1 for opt in options):
        raise NeighborhoodEmpty(f"no admissible neighbor of {center} at ngh={ngh}")
    while True:
        candidate = tuple(opt[int(rng.integers(len(opt)))] for opt in options)
        if candidate != center:
            return candidate


def neighborhood(space: ParamSpace, center, ngh: int) -> list:
    """Every point ``neighbor`` can return, in lexicographic order."""
    center = tuple(center)
    options = _neighborhood_options(space, center, ngh)
    return [p for p in itertools.product(*options) if p != center]


def enumerate_grid(space: ParamSpace, limit: int = DEFAULT_ENUMERATION_LIMIT) -> Iterator[ParamVector]:
    """Yield every grid point once, in lexicographic order.

    The size check happens eagerly so an oversized space fails at call time.
    """
    if space.cardinality > limit:
        raise SpaceTooLarge(f"space has {space.cardinality} points, enumeration limit is {limit}")
    return itertools.product(*(d.grid() for d in space.domains))

"""Fitness functions: planted-optimum surrogate surfaces, integer test functions,
seeded noise, memoization, and the :class:`ObjectiveSpec` factory.

Every objective is a callable ``objective(values, eval_id) -> float`` where
``values`` is a parameter tuple and ``eval_id`` is the engine's evaluation
sequence number (only the noise wrapper and the external evaluator use it).
Fitness is maximized.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import Future
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionUnverifiable, DimensionMismatch, InvalidConfig, SpaceTooLarge
from .space import DEFAULT_ENUMERATION_LIMIT, ParamDomain, ParamSpace, enumerate_grid

# The planted default: best epochs/units and best accuracy reported for the LSTM tuning run.
DEFAULT_OPTIMUM = {"epochs": 49, "units": 108}
DEFAULT_PEAK = 0.9963
DEFAULT_COEFFS = {"epochs": 2e-5, "units": 1e-6}
DEFAULT_SPACE = ParamSpace([ParamDomain("epochs", 1, 100), ParamDomain("units", 16, 256)])

KINDS = ("surrogate_unimodal", "surrogate_multimodal", "sphere_int", "rastrigin_int", "external")
SETTING_KEYS = {"optimum", "peak", "coeffs", "bumps", "verify", "shift", "noise", "command", "timeout"}
_KIND_ALIASES = {
    "SurrogateUnimodal": "surrogate_unimodal",
    "SurrogateMultimodal": "surrogate_multimodal",
    "SphereInt": "sphere_int",
    "RastriginInt": "rastrigin_int",
    "External": "external",
}


def _check_dims(v, ref, what="optimum"):
    if len(v) != len(ref):
        raise DimensionMismatch(f"vector has {len(v)} dimensions, {what} has {len(ref)}")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def surrogate_unimodal(v, optimum, peak: float, coeffs) -> float:
    """``clamp(peak - sum(coeffs_i * (v_i - optimum_i)**2), 0, 1)``."""
    _check_dims(v, optimum)
    _check_dims(coeffs, optimum, "coeffs")
    penalty = 0.0
    for x, o, c in zip(v, optimum, coeffs):
        penalty += c * (x - o) ** 2
    return _clamp01(peak - penalty)


def rastrigin_int(v, shift) -> float:
    """Negated Rastrigin on the integer lattice; maximum 0 at ``v == shift``."""
    _check_dims(v, shift, "shift")
    total = 0.0
    for x, s in zip(v, shift):
        d = x - s
        total += d * d - 10.0 * math.cos(2.0 * math.pi * d) + 10.0
    return -total


def sphere_int(v, shift) -> float:
    _check_dims(v, shift, "shift")
    return -float(sum((x - s) ** 2 for x, s in zip(v, shift)))


class Objective:
    """Base class: callable objective, usable as a context manager."""

    name = "objective"
    deterministic = True

    def __call__(self, values, eval_id: int = 0) -> float:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class UnimodalSurface(Objective):
    name = "surrogate_unimodal"

    def __init__(self, optimum, peak: float = DEFAULT_PEAK, coeffs=None):
        self.optimum = tuple(int(o) for o in optimum)
        self.peak = float(peak)
        self.coeffs = tuple(float(c) for c in coeffs)
        _check_dims(self.coeffs, self.optimum, "coeffs")
        if any(c <= 0 for c in self.coeffs):
            raise InvalidConfig("surface coeffs must be positive")

    def raw(self, values) -> float:
        _check_dims(values, self.optimum)
        penalty = 0.0
        for x, o, c in zip(values, self.optimum, self.coeffs):
            penalty += c * (x - o) ** 2
        return self.peak - penalty

    def __call__(self, values, eval_id: int = 0) -> float:
        return surrogate_unimodal(values, self.optimum, self.peak, self.coeffs)


@dataclass(frozen=True)
class Bump:
    center: tuple
    width: float
    height: float


class MultimodalSurface(UnimodalSurface):
    """Unimodal quadratic plus Gaussian bumps that create deceptive local maxima.

    A bump given without an explicit ``height`` is sized from ``depth``: its
    top sits at ``peak - depth * penalty(center)``, i.e. a fraction ``depth``
    of the way down from the global peak to the bare quadratic at that point.
    """

    name = "surrogate_multimodal"

    def __init__(self, optimum, peak=DEFAULT_PEAK, coeffs=None, bumps=(), space=None,
                 verify=True, limit=DEFAULT_ENUMERATION_LIMIT):
        super().__init__(optimum, peak, coeffs)
        resolved = []
        for b in bumps:
            center = tuple(int(c) for c in b["center"])
            _check_dims(center, self.optimum, "bump center")
            width = float(b.get("width", 2.0))
            if width <= 0:
                raise InvalidConfig("bump width must be positive")
            if b.get("height") is not None:
                height = float(b["height"])
            else:
                depth = float(b.get("depth", 0.2))
                if not 0.0 < depth < 1.0:
                    raise InvalidConfig("bump depth must lie in (0, 1)")
                height = (1.0 - depth) * (self.peak - self.raw(center))
            if height < 0:
                raise InvalidConfig("bump height must be non-negative")
            resolved.append(Bump(center, width, height))
        self.bumps = tuple(resolved)
        top = self(self.optimum)
        for b in self.bumps:
            if b.center != self.optimum and not self(b.center) < top:
                raise InvalidConfig(f"bump at {b.center} reaches the global peak")
        if space is not None and verify:
            self.verify(space, limit)

    def bump_sum(self, values) -> float:
        total = 0.0
        for b in self.bumps:
            dist2 = sum((x - c) ** 2 for x, c in zip(values, b.center))
            total += b.height * math.exp(-dist2 / (b.width * b.width))
        return total

    def __call__(self, values, eval_id: int = 0) -> float:
        return _clamp01(self.raw(values) + self.bump_sum(values))

    def to_spec(self, space: ParamSpace) -> "ObjectiveSpec":
        """Equivalent ObjectiveSpec, with bump heights written out explicitly."""
        return ObjectiveSpec("surrogate_multimodal", {
            "optimum": space.as_dict(self.optimum),
            "peak": self.peak,
            "coeffs": dict(zip(space.names, self.coeffs)),
            "bumps": [{"center": space.as_dict(b.center), "width": b.width, "height": b.height} for b in self.bumps],
        })

    def verify(self, space: ParamSpace, limit=DEFAULT_ENUMERATION_LIMIT) -> None:
        """Check by enumeration that the planted optimum is the unique argmax."""
        if not space.contains(self.optimum):
            raise InvalidConfig(f"optimum {self.optimum} is not a point of the space")
        try:
            grid = enumerate_grid(space, limit)
        except SpaceTooLarge as exc:
            raise ConstructionUnverifiable(str(exc)) from exc
        top = self(self.optimum)
        for p in grid:
            if p != self.optimum and self(p) >= top:
                raise InvalidConfig(f"planted optimum {self.optimum} is not the unique argmax: {p} ties or wins")


def random_multimodal(space: ParamSpace, rng: np.random.Generator, n_bumps: int = 3,
                      peak: float = 0.99, max_tries: int = 100) -> MultimodalSurface:
    """Random verified multimodal surface: random optimum, bump centers, widths and depths.

    Bump centers keep at least three grid steps from the optimum on some axis;
    draws whose enumeration check fails are discarded and redrawn.
    """
    # curvature scaled so the far corner sits about 0.5 below the peak
    coeffs = tuple(0.5 / (space.ndim * max(1, d.upper - d.lower) ** 2) for d in space.domains)
    for _ in range(max_tries):
        optimum = tuple(d.lower + d.step * int(rng.integers(d.size)) for d in space.domains)
        bumps = []
        for _ in range(1000 * n_bumps):
            if len(bumps) == n_bumps:
                break
            center = tuple(d.lower + d.step * int(rng.integers(d.size)) for d in space.domains)
            if all(abs(c - o) < 3 * d.step for c, o, d in zip(center, optimum, space.domains)):
                continue
            width = float(rng.uniform(1.0, 2.5)) * min(d.step for d in space.domains)
            bumps.append({"center": center, "width": width, "depth": float(rng.uniform(0.05, 0.5))})
        if len(bumps) < n_bumps:
            continue
        try:
            return MultimodalSurface(optimum, peak, coeffs, bumps, space=space)
        except InvalidConfig:
            continue
    raise InvalidConfig(f"could not construct a verified surface in {max_tries} tries")


class ShiftedSurface(Objective):
    def __init__(self, func, shift, name):
        self.func = func
        self.shift = tuple(int(s) for s in shift)
        self.name = name

    def __call__(self, values, eval_id: int = 0) -> float:
        return self.func(values, self.shift)


class Noisy(Objective):
    """Adds Gaussian noise drawn from a stream keyed by ``(seed, eval_id)``."""

    deterministic = False

    def __init__(self, inner, stddev: float, seed: int, clamp: bool = True):
        self.inner = inner
        self.stddev = float(stddev)
        self.seed = int(seed)
        self.clamp = clamp
        self.name = inner.name

    def __call__(self, values, eval_id: int = 0) -> float:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, int(eval_id)]))
        value = self.inner(values, eval_id) + self.stddev * float(rng.standard_normal())
        return _clamp01(value) if self.clamp else value

    def close(self):
        self.inner.close()


class Memoized(Objective):
    """Caches fitness by parameter tuple; at most one inner call per key, even under threads."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.calls = 0
        self.hits = 0
        self._cache: dict = {}
        self._lock = threading.Lock()

    @property
    def inner_invocations(self) -> int:
        return self.calls - self.hits

    def __call__(self, values, eval_id: int = 0) -> float:
        key = tuple(values)
        with self._lock:
            self.calls += 1
            fut = self._cache.get(key)
            owner = fut is None
            if owner:
                fut = Future()
                self._cache[key] = fut
            else:
                self.hits += 1
        if owner:
            try:
                fut.set_result(self.inner(key, eval_id))
            except BaseException as exc:
                fut.set_exception(exc)
                with self._lock:
                    self._cache.pop(key, None)
        return fut.result()

    def close(self):
        self.inner.close()


def memoized(inner) -> Memoized:
    return Memoized(inner)


class CountingObjective(Objective):
    """Wraps an objective and counts calls (used by tests and diagnostics)."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.count = 0
        self._lock = threading.Lock()

    def __call__(self, values, eval_id: int = 0) -> float:
        with self._lock:
            self.count += 1
        return self.inner(values, eval_id)

    def close(self):
        self.inner.close()


def _vector_setting(settings, key, space, default=None):
    raw = settings.get(key, default)
    if raw is None:
        raise InvalidConfig(f"objective.{key} is required")
    if isinstance(raw, dict):
        try:
            return space.from_dict(raw)
        except Exception as exc:
            raise InvalidConfig(f"objective.{key}: {exc}") from None
    if isinstance(raw, list) and len(raw) == space.ndim:
        return tuple(int(x) for x in raw)
    raise InvalidConfig(f"objective.{key} must map every parameter name to an integer")


def _coeff_setting(settings, space, default):
    raw = settings.get("coeffs", default)
    if raw is None:
        raise InvalidConfig("objective.coeffs is required")
    if isinstance(raw, dict):
        missing = [n for n in space.names if n not in raw]
        if missing:
            raise InvalidConfig(f"objective.coeffs missing {', '.join(missing)}")
        return tuple(float(raw[n]) for n in space.names)
    if isinstance(raw, list) and len(raw) == space.ndim:
        return tuple(float(x) for x in raw)
    raise InvalidConfig("objective.coeffs must give one positive number per parameter")


@dataclass
class ObjectiveSpec:
    """Which fitness function to evaluate and its settings.

    ``settings`` holds the kind-specific keys exactly as they appear in the
    config file (``optimum``, ``peak``, ``coeffs``, ``bumps``, ``shift``,
    ``noise``, ``command``, ``timeout``).
    """

    kind: str = "surrogate_unimodal"
    settings: dict = field(default_factory=dict)
    memoize: bool | None = None

    def __post_init__(self):
        self.kind = _KIND_ALIASES.get(self.kind, self.kind)
        if self.kind not in KINDS:
            raise InvalidConfig(f"objective.kind must be one of {', '.join(KINDS)}, got {self.kind!r}")
        noise = self.settings.get("noise") or {}
        stddev = float(noise.get("stddev", 0.0))
        if stddev < 0:
            raise InvalidConfig("objective.noise.stddev must be >= 0")
        if self.kind == "external":
            cmd = self.settings.get("command")
            if not cmd:
                raise InvalidConfig("objective.command is required for the external kind")
            if stddev > 0:
                raise InvalidConfig("objective.noise is not supported for the external kind")
        if self.memoize is None:
            self.memoize = self.kind != "external" and stddev == 0
        if self.memoize and stddev > 0:
            raise InvalidConfig("objective.memoize cannot be combined with noise (stddev > 0)")

    @property
    def noise_stddev(self) -> float:
        return float((self.settings.get("noise") or {}).get("stddev", 0.0))

    @property
    def identifier(self) -> str:
        return self.kind

    @classmethod
    def from_json(cls, obj) -> "ObjectiveSpec":
        if obj is None:
            obj = {}
        if not isinstance(obj, dict):
            raise InvalidConfig("objective must be an object")
        obj = dict(obj)
        kind = obj.pop("kind", "surrogate_unimodal")
        memoize = obj.pop("memoize", None)
        unknown = sorted(set(obj) - SETTING_KEYS)
        if unknown:
            raise InvalidConfig(f"objective: unknown keys {unknown}")
        return cls(kind, obj, memoize)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.settings, "memoize": self.memoize}

    def resolved(self, space: ParamSpace) -> "ObjectiveSpec":
        """Copy with every defaulted setting written out (for effective-config echo)."""
        s = dict(self.settings)
        if self.kind in ("surrogate_unimodal", "surrogate_multimodal"):
            opt = _vector_setting(s, "optimum", space, _default_for(space, DEFAULT_OPTIMUM))
            s["optimum"] = space.as_dict(opt)
            s["peak"] = float(s.get("peak", DEFAULT_PEAK))
            s["coeffs"] = dict(zip(space.names, _coeff_setting(s, space, _default_for(space, DEFAULT_COEFFS))))
        elif self.kind in ("sphere_int", "rastrigin_int"):
            s["shift"] = space.as_dict(_vector_setting(s, "shift", space))
        return ObjectiveSpec(self.kind, s, self.memoize)


def _default_for(space: ParamSpace, table: dict):
    """Defaults apply only when every parameter name has a planted default."""
    if all(n in table for n in space.names):
        return {n: table[n] for n in space.names}
    return None


def build_objective(spec: ObjectiveSpec, space: ParamSpace) -> Objective:
    """Instantiate the evaluator for ``spec`` over ``space``."""
    s = spec.settings
    kind = spec.kind
    if kind == "external":
        from .external import ExternalEvaluator

        return ExternalEvaluator(s["command"], space.names, timeout=float(s.get("timeout", 60.0)))
    if kind in ("surrogate_unimodal", "surrogate_multimodal"):
        optimum = _vector_setting(s, "optimum", space, _default_for(space, DEFAULT_OPTIMUM))
        if not space.contains(optimum):
            raise InvalidConfig(f"objective.optimum {space.as_dict(optimum)} lies outside the space")
        peak = float(s.get("peak", DEFAULT_PEAK))
        coeffs = _coeff_setting(s, space, _default_for(space, DEFAULT_COEFFS))
        if kind == "surrogate_unimodal":
            obj = UnimodalSurface(optimum, peak, coeffs)
        else:
            bumps = []
            for b in s.get("bumps", []):
                b = dict(b)
                if isinstance(b.get("center"), dict):
                    b["center"] = space.from_dict(b["center"])
                bumps.append(b)
            if len(bumps) < 2:
                raise InvalidConfig("objective.bumps needs at least two bumps")
            obj = MultimodalSurface(optimum, peak, coeffs, bumps, space=space,
                                    verify=bool(s.get("verify", True)))
        clamp = True
    elif kind == "sphere_int":
        obj = ShiftedSurface(sphere_int, _vector_setting(s, "shift", space), kind)
        clamp = False
    else:
        obj = ShiftedSurface(rastrigin_int, _vector_setting(s, "shift", space), kind)
        clamp = False
    if spec.noise_stddev > 0:
        noise = s.get("noise") or {}
        obj = Noisy(obj, spec.noise_stddev, int(noise.get("seed", 0)), clamp=clamp)
    if spec.memoize:
        obj = Memoized(obj)
    return obj


def planted_optimum(spec: ObjectiveSpec, space: ParamSpace):
    """Known argmax of a built-in surface, or None when it is not known by construction."""
    if spec.kind in ("surrogate_unimodal", "surrogate_multimodal"):
        return _vector_setting(spec.settings, "optimum", space, _default_for(space, DEFAULT_OPTIMUM))
    if spec.kind in ("sphere_int", "rastrigin_int"):
        return _vector_setting(spec.settings, "shift", space)
    return None

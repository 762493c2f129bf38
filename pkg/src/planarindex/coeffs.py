"""T-periodic scalar functions and symmetric coefficient paths S(t).

A :class:`CoeffPath` holds the three entries ``a, b, c`` of

    S(t) = [[a(t), b(t)],
            [b(t), c(t)]]

Entries are trigonometric polynomials (exact evaluation), uniformly sampled
tables (periodic cubic interpolation), or arbitrary callables. Only the first
two kinds serialize.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError


class PeriodicFunction:
    period: float

    def __call__(self, t):
        raise NotImplementedError

    def shifted(self, c: float) -> "PeriodicFunction":
        raise NotImplementedError

    def sup_norm(self, n: int = 512) -> float:
        ts = np.linspace(0.0, self.period, n, endpoint=False)
        return float(max(abs(self(float(t))) for t in ts))

    def to_dict(self) -> dict:
        raise ConfigError(f"{type(self).__name__} is not serializable")


@dataclass(frozen=True)
class TrigPoly(PeriodicFunction):
    """sum_n cos[n] cos(2 pi n t / T) + sin[n] sin(2 pi n t / T); sin[0] is ignored."""

    period: float
    cos: tuple = (0.0,)
    sin: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(x) for x in self.cos) or (0.0,))
        object.__setattr__(self, "sin", tuple(float(x) for x in self.sin))
        object.__setattr__(self, "_cos", np.array(self.cos[1:]))
        object.__setattr__(self, "_sin", np.array(self.sin[1:]))
        n = max(len(self.cos), len(self.sin), 1)
        object.__setattr__(self, "_freq", 2 * math.pi * np.arange(1, n) / self.period)
        object.__setattr__(self, "_freq_list", [float(f) for f in self._freq])
        object.__setattr__(self, "_constant", not (np.any(self._cos) or np.any(self._sin)))

    @classmethod
    def constant(cls, value: float, period: float) -> "TrigPoly":
        return cls(period, (value,))

    @property
    def is_constant(self) -> bool:
        return self._constant

    def __call__(self, t):
        if not len(self._freq) or self.is_constant:
            return np.full(np.shape(t), self.cos[0]) if isinstance(t, np.ndarray) else self.cos[0]
        if isinstance(t, np.ndarray):
            w = np.multiply.outer(t, self._freq)
            out = self.cos[0] + np.cos(w[..., : len(self._cos)]) @ self._cos
            if len(self._sin):
                out = out + np.sin(w[..., : len(self._sin)]) @ self._sin
            return out
        # scalar path: a plain loop beats numpy for a handful of harmonics
        t = float(t)
        v = self.cos[0]
        for f, c in zip(self._freq_list, self.cos[1:]):
            v += c * math.cos(f * t)
        for f, s in zip(self._freq_list, self.sin[1:]):
            v += s * math.sin(f * t)
        return v

    def shifted(self, c: float) -> "TrigPoly":
        return TrigPoly(self.period, (self.cos[0] + c,) + self.cos[1:], self.sin)

    def scaled(self, s: float) -> "TrigPoly":
        return TrigPoly(self.period, tuple(s * x for x in self.cos), tuple(s * x for x in self.sin))

    def sup_norm(self, n: int = 512) -> float:
        if self.is_constant:
            return abs(self.cos[0])
        return float(np.max(np.abs(self(np.linspace(0.0, self.period, n, endpoint=False)))))

    def to_dict(self) -> dict:
        d = {"cos": list(self.cos)}
        if self.sin:
            d["sin"] = list(self.sin)
        return d


@dataclass(frozen=True)
class SampledTable(PeriodicFunction):
    """Values on the uniform grid t_i = i T / n, i = 0..n-1, periodic cubic spline."""

    period: float
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 4:
            raise ConfigError("sampled table needs at least 4 samples")
        object.__setattr__(self, "values", vals)
        n = len(vals)
        ts = np.linspace(0.0, self.period, n + 1)
        spline = CubicSpline(ts, np.r_[vals, vals[0]], bc_type="periodic")
        object.__setattr__(self, "_spline", spline)

    def __call__(self, t):
        tt = np.mod(t, self.period)
        v = self._spline(tt)
        return v if isinstance(t, np.ndarray) else float(v)

    def shifted(self, c: float) -> "SampledTable":
        return SampledTable(self.period, tuple(v + c for v in self.values))

    def to_dict(self) -> dict:
        return {"samples": list(self.values)}


@dataclass(frozen=True)
class CallableFunction(PeriodicFunction):
    period: float
    fn: Callable[[float], float] = field(compare=False)
    shift: float = 0.0

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            return np.vectorize(lambda s: self.fn(float(s)))(t) + self.shift
        return float(self.fn(t)) + self.shift

    def shifted(self, c: float) -> "CallableFunction":
        return CallableFunction(self.period, self.fn, self.shift + c)


def periodic_from_dict(d, period: float) -> PeriodicFunction:
    if isinstance(d, (int, float)):
        return TrigPoly.constant(float(d), period)
    if not isinstance(d, dict):
        raise ConfigError(f"cannot read coefficient from {d!r}")
    unknown = set(d) - {"cos", "sin", "samples"}
    if unknown:
        raise ConfigError(f"unknown coefficient fields {sorted(unknown)}")
    if "samples" in d:
        if "cos" in d or "sin" in d:
            raise ConfigError("give either samples or cos/sin, not both")
        return SampledTable(period, tuple(d["samples"]))
    return TrigPoly(period, tuple(d.get("cos", (0.0,))), tuple(d.get("sin", ())))


@dataclass(frozen=True)
class CoeffPath:
    period: float
    a: PeriodicFunction
    b: PeriodicFunction
    c: PeriodicFunction

    def __post_init__(self):
        if not self.period > 0:
            raise ConfigError("period must be positive")

    @classmethod
    def constant(cls, a: float, b: float, c: float, period: float) -> "CoeffPath":
        return cls(
            period,
            TrigPoly.constant(a, period),
            TrigPoly.constant(b, period),
            TrigPoly.constant(c, period),
        )

    @property
    def is_constant(self) -> bool:
        return all(isinstance(f, TrigPoly) and f.is_constant for f in (self.a, self.b, self.c))

    def entries(self, t: float) -> tuple[float, float, float]:
        return self.a(t), self.b(t), self.c(t)

    def matrix(self, t: float) -> np.ndarray:
        a, b, c = self.entries(t)
        return np.array([[a, b], [b, c]])

    def to_dict(self) -> dict:
        return {"T": self.period, "a": self.a.to_dict(), "b": self.b.to_dict(), "c": self.c.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "CoeffPath":
        unknown = set(d) - {"T", "a", "b", "c"}
        if unknown:
            raise ConfigError(f"unknown CoeffPath fields {sorted(unknown)}")
        if "T" not in d:
            raise ConfigError("CoeffPath needs a period T")
        T = float(d["T"])
        return cls(
            T,
            periodic_from_dict(d.get("a", 0.0), T),
            periodic_from_dict(d.get("b", 0.0), T),
            periodic_from_dict(d.get("c", 0.0), T),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "CoeffPath":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "CoeffPath":
        return cls.loads(Path(path).read_text())

"""Piecewise-constant hazard functions with exact integration and inversion.

A constant hazard is the piecewise family with no breakpoints, so both share
one closed-form code path:

    Lambda(t) = C[k] + rate[k] * (t - start[k]),   start[k] <= t < start[k+1]

where ``C[k]`` is the cumulative hazard accumulated up to ``start[k]``.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


def _as_time(t, name="t"):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be nonnegative, got {t!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class HazardSpec:
    """Positive hazard, constant between breakpoints and right-continuous."""

    breaks: tuple[float, ...]
    rates: tuple[float, ...]
    _starts: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        rates = tuple(float(r) for r in self.rates)
        if len(rates) != len(breaks) + 1:
            raise DomainError(
                f"need exactly one more rate than breakpoints, got {len(rates)} rates "
                f"for {len(breaks)} breakpoints"
            )
        for r in rates:
            if not (math.isfinite(r) and r > 0):
                raise DomainError(f"rates must be finite and strictly positive, got {r!r}")
        prev = 0.0
        for i, b in enumerate(breaks):
            if not math.isfinite(b) or b <= prev or (i == 0 and b <= 0):
                raise DomainError(
                    f"breakpoints must be finite, positive and strictly increasing, got {breaks!r}"
                )
            prev = b
        starts = np.array((0.0,) + breaks)
        widths = np.diff(starts)
        cum = np.concatenate(([0.0], np.cumsum(np.array(rates[:-1]) * widths)))
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_cum", cum)

    @property
    def family(self) -> str:
        return "constant" if not self.breaks else "piecewise"

    @property
    def is_constant(self) -> bool:
        return not self.breaks

    def _segment(self, t):
        return np.searchsorted(self._starts, t, side="right") - 1

    def _scalar_segment(self, t: float) -> int:
        if not t >= 0:
            raise DomainError(f"t must be nonnegative, got {t!r}")
        return bisect.bisect_right(self.breaks, t)

    def evaluate(self, t):
        if type(t) is float:
            return self.rates[self._scalar_segment(t)]
        t = _as_time(t)
        if self.is_constant:
            return _out(np.full_like(t, self.rates[0]))
        return _out(np.asarray(self.rates)[self._segment(t)])

    def cumulative(self, t):
        if type(t) is float:
            k = self._scalar_segment(t)
            return float(self._cum[k]) + self.rates[k] * (t - float(self._starts[k]))
        t = _as_time(t)
        if self.is_constant:
            return _out(self.rates[0] * t)
        k = self._segment(t)
        return _out(self._cum[k] + np.asarray(self.rates)[k] * (t - self._starts[k]))

    def inverse_cumulative(self, x):
        x = _as_time(x, "x")
        if self.is_constant:
            return _out(x / self.rates[0])
        k = np.searchsorted(self._cum, x, side="right") - 1
        return _out(self._starts[k] + (x - self._cum[k]) / np.asarray(self.rates)[k])

    def survival(self, t):
        return _out(np.exp(-np.asarray(self.cumulative(t))))

    def __add__(self, other: HazardSpec) -> HazardSpec:
        """Pointwise sum; breakpoints are merged."""
        breaks = sorted(set(self.breaks) | set(other.breaks))
        probe = [0.0] + breaks
        rates = [self.evaluate(b) + other.evaluate(b) for b in probe]
        return HazardSpec(tuple(breaks), tuple(rates))

    def to_dict(self) -> dict[str, Any]:
        if self.is_constant:
            return {"family": "constant", "rate": self.rates[0]}
        return {"family": "piecewise", "breaks": list(self.breaks), "rates": list(self.rates)}


def constant(rate: float) -> HazardSpec:
    return HazardSpec((), (rate,))


def piecewise(breaks: Sequence[float], rates: Sequence[float]) -> HazardSpec:
    return HazardSpec(tuple(breaks), tuple(rates))


def from_dict(spec: dict[str, Any]) -> HazardSpec:
    """Build a hazard from ``{"family": "constant", "rate": r}`` or
    ``{"family": "piecewise", "breaks": [...], "rates": [...]}``."""
    if not isinstance(spec, dict):
        raise DomainError(f"hazard spec must be an object, got {spec!r}")
    family = spec.get("family")
    if family == "constant":
        allowed = {"family", "rate"}
    elif family == "piecewise":
        allowed = {"family", "breaks", "rates"}
    else:
        raise DomainError(f"unknown hazard family {family!r}")
    unknown = set(spec) - allowed
    if unknown:
        raise DomainError(f"unknown hazard keys {sorted(unknown)} for family {family!r}")
    missing = allowed - set(spec)
    if missing:
        raise DomainError(f"missing hazard keys {sorted(missing)} for family {family!r}")
    try:
        if family == "constant":
            return constant(float(spec["rate"]))
        return piecewise([float(b) for b in spec["breaks"]], [float(r) for r in spec["rates"]])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed hazard spec {spec!r}: {exc}") from exc


def parse(text: str) -> HazardSpec:
    return from_dict(json.loads(text))


def evaluate(h: HazardSpec, t):
    return h.evaluate(t)


def cumulative(h: HazardSpec, t):
    return h.cumulative(t)


def inverse_cumulative(h: HazardSpec, x):
    return h.inverse_cumulative(x)

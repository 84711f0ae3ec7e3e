"""The identified minimum of (W, Y) and its sub-survival functions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from treatdur.hazards import DomainError, _as_time, _out
from treatdur.model import TreatmentModel, _truncation, subdensity_w_first, subdensity_y_first
from treatdur.quadrature import integrate
from treatdur.sampling import DurationBatch, DurationPair


class Cause(str, enum.Enum):
    Y_FIRST = "Y_FIRST"
    W_FIRST = "W_FIRST"
    TIE = "TIE"


_CODES = {Cause.Y_FIRST: 0, Cause.W_FIRST: 1, Cause.TIE: 2}
_CAUSES = {v: k for k, v in _CODES.items()}


def _cause(cause) -> Cause:
    try:
        return Cause(cause)
    except ValueError:
        raise DomainError(f"unknown cause {cause!r}") from None


@dataclass(frozen=True)
class IdentifiedMinimum:
    t: float
    cause: Cause


class AbsurdSampleError(DomainError):
    """A flawed-mode pair with a negative outcome time has no place on the time axis."""


def identify_minimum(p: DurationPair) -> IdentifiedMinimum:
    if p.absurd:
        raise AbsurdSampleError(f"cannot classify absurd pair {p!r}")
    if p.y < p.w:
        return IdentifiedMinimum(p.y, Cause.Y_FIRST)
    if p.w < p.y:
        return IdentifiedMinimum(p.w, Cause.W_FIRST)
    return IdentifiedMinimum(p.w, Cause.TIE)


class MinimumBatch:
    """Column form of many identified minima: times ``t`` and integer cause codes."""

    def __init__(self, t, codes):
        self.t = np.asarray(t, dtype=float)
        self.codes = np.asarray(codes, dtype=np.int8)
        if self.t.shape != self.codes.shape:
            raise DomainError("times and causes differ in length")

    @classmethod
    def from_minima(cls, mins) -> MinimumBatch:
        mins = list(mins)
        return cls([m.t for m in mins], [_CODES[_cause(m.cause)] for m in mins])

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> IdentifiedMinimum:
        return IdentifiedMinimum(float(self.t[i]), _CAUSES[int(self.codes[i])])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def times(self, cause) -> np.ndarray:
        return self.t[self.codes == _CODES[_cause(cause)]]

    def count(self, cause) -> int:
        return int(np.count_nonzero(self.codes == _CODES[_cause(cause)]))

    @property
    def n_ties(self) -> int:
        return self.count(Cause.TIE)

    @property
    def n_effective(self) -> int:
        """Observations that enter the sub-survival estimates (ties excluded)."""
        return len(self) - self.n_ties

    def share(self, cause) -> float:
        return self.count(cause) / self.n_effective


def identify_minima(batch: DurationBatch) -> MinimumBatch:
    """Vectorised :func:`identify_minimum`; rejects batches holding absurd pairs."""
    if np.any(batch.absurd):
        raise AbsurdSampleError(
            f"{int(np.count_nonzero(batch.absurd))} absurd pairs in batch; drop them first"
        )
    codes = np.where(batch.y < batch.w, 0, np.where(batch.w < batch.y, 1, 2))
    return MinimumBatch(np.minimum(batch.w, batch.y), codes)


def as_minima(data) -> MinimumBatch:
    if isinstance(data, MinimumBatch):
        return data
    if isinstance(data, DurationBatch):
        return identify_minima(data)
    data = list(data)
    if data and isinstance(data[0], DurationPair):
        return MinimumBatch.from_minima(identify_minimum(p) for p in data)
    return MinimumBatch.from_minima(data)


def _closed_form(m: TreatmentModel, cause: Cause, t):
    lw, l0 = m.hW.rates[0], m.h0.rates[0]
    rate = l0 if cause is Cause.Y_FIRST else lw
    return rate / (l0 + lw) * np.exp(-(l0 + lw) * t)


def _quadrature(m: TreatmentModel, cause: Cause, t):
    dens = subdensity_y_first if cause is Cause.Y_FIRST else subdensity_w_first
    flat = np.ravel(t)
    grid, inverse = np.unique(flat, return_inverse=True)
    upper = _truncation(m, float(grid[-1]))
    points = m.hW.breaks + m.h0.breaks
    f = lambda s: dens(m, s)  # noqa: E731
    # integrate panel by panel between consecutive grid points, then sum tails
    panels = [integrate(f, float(a), float(b), points) for a, b in zip(grid[:-1], grid[1:])]
    panels.append(integrate(f, float(grid[-1]), upper, points))
    tails = np.empty(len(grid))
    for k in range(len(grid) - 1, -1, -1):
        tails[k] = math.fsum(panels[k:])
    return tails[inverse].reshape(np.shape(t))


def analytic_subsurvival(m: TreatmentModel, cause, t):
    """Pr(min > t, cause first) from the cause's sub-density.

    Closed form when ``hW`` and ``h0`` are both constant, quadrature
    otherwise. ``h1`` never enters.
    """
    cause = _cause(cause)
    if cause is Cause.TIE:
        raise DomainError("ties carry no probability mass")
    t = _as_time(t)
    if m.hW.is_constant and m.h0.is_constant:
        return _out(_closed_form(m, cause, t))
    return _out(_quadrature(m, cause, t))


def minimum_survival(m: TreatmentModel, t):
    """Pr(min(W, Y) > t) = exp(-Lambda0(t) - LambdaW(t))."""
    t = _as_time(t)
    return _out(np.exp(-m.h0.cumulative(t) - m.hW.cumulative(t)))

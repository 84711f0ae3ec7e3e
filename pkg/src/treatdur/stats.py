"""Empirical sub-survival curves, sup-distance checks and the selected-sample regression."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from treatdur.competing_risks import Cause, MinimumBatch, _cause, analytic_subsurvival, as_minima
from treatdur.hazards import DomainError
from treatdur.model import TreatmentModel
from treatdur.sampling import DurationBatch, Mode, coupled_sample, sample_batch

GRID_POINTS = 1000
GRID_QUANTILE = 0.999
ONE_SAMPLE_C = 1.63
TWO_SAMPLE_C = 1.628
MIN_GOF_N = 100


class PreconditionError(DomainError):
    pass


@dataclass(frozen=True)
class SubsurvivalCurve:
    kind: str
    cause: Cause
    support: np.ndarray
    values: np.ndarray
    n: int = 0
    _sorted: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        """Evaluate at arbitrary times (empirical: exact step function)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "empirical":
            above = len(self._sorted) - np.searchsorted(self._sorted, t, side="right")
            return above / self.n
        return np.interp(t, self.support, self.values)


def empirical_subsurvival(mins, cause) -> SubsurvivalCurve:
    """Step function ``S_n(t) = #{t_i > t, cause_i = cause} / n``, ties excluded from n.

    ``support`` starts at 0 and lists the cause's jump times; ``values[k]`` is
    the curve on ``[support[k], support[k+1])``.
    """
    cause = _cause(cause)
    mins = as_minima(mins)
    n = mins.n_effective
    if n == 0:
        raise DomainError("need at least one non-tied observation")
    times = np.sort(mins.times(cause))
    support = np.unique(np.concatenate(([0.0], times)))
    above = len(times) - np.searchsorted(times, support, side="right")
    return SubsurvivalCurve("empirical", cause, support, above / n, n, times)


def analytic_curve(m: TreatmentModel, cause, grid) -> SubsurvivalCurve:
    grid = np.asarray(grid, dtype=float)
    return SubsurvivalCurve("analytic", _cause(cause), grid, np.asarray(analytic_subsurvival(m, cause, grid)))


@dataclass
class GofReport:
    experiment: str
    cause: str
    statistic: float
    n: int
    threshold: float
    absurd_rate: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold

    def csv_row(self) -> str:
        return (
            f"{self.experiment},{self.cause},{self.n},{self.statistic:.17g},"
            f"{self.threshold:.17g},{int(self.passed)},{self.absurd_rate:.17g}"
        )

    def summary(self) -> str:
        verdict = "pass" if self.passed else "fail"
        return (
            f"{self.experiment} [{self.cause}] n={self.n} statistic={self.statistic:.6g} "
            f"threshold={self.threshold:.6g} -> {verdict}"
        )


REPORT_COLUMNS = "experiment,cause,n,statistic,threshold,pass,absurd_rate"


def gof_grid(mins: MinimumBatch, points: int = GRID_POINTS) -> np.ndarray:
    """Equally spaced grid over [0, 99.9th percentile of the observed minima]."""
    keep = mins.t[mins.codes != 2]
    top = float(np.quantile(keep, GRID_QUANTILE))
    return np.linspace(0.0, top, points)


def _reject_absurd(data):
    if isinstance(data, DurationBatch) and np.any(data.absurd):
        raise PreconditionError("absurd-flagged pairs must be excluded before a goodness-of-fit check")


def gof_subsurvival(mins, m: TreatmentModel, cause, grid=None, experiment: str = "gof") -> GofReport:
    """Sup-distance between empirical and analytic sub-survival on a grid.

    Passes when the distance is at most ``1.63 / sqrt(n)``.
    """
    _reject_absurd(mins)
    cause = _cause(cause)
    mins = as_minima(mins)
    n = mins.n_effective
    if n < MIN_GOF_N:
        raise DomainError(f"need at least {MIN_GOF_N} observations, got {n}")
    grid = gof_grid(mins) if grid is None else np.asarray(grid, dtype=float)
    emp = empirical_subsurvival(mins, cause)
    empirical = emp(grid)
    analytic = np.asarray(analytic_subsurvival(m, cause, grid))
    diff = np.abs(empirical - analytic)
    k = int(np.argmax(diff))
    return GofReport(
        experiment,
        cause.value,
        float(diff[k]),
        n,
        ONE_SAMPLE_C / math.sqrt(n),
        details={"grid": grid, "empirical": empirical, "analytic": analytic, "argmax_t": float(grid[k])},
    )


def two_sample_distance(a: MinimumBatch, b: MinimumBatch, cause) -> float:
    """Exact sup over t of the gap between two empirical sub-survival curves."""
    ca, cb = empirical_subsurvival(a, cause), empirical_subsurvival(b, cause)
    jumps = np.concatenate(([0.0], ca.support, cb.support))
    return float(np.max(np.abs(ca(jumps) - cb(jumps))))


def two_sample_gof(a, b, experiment: str = "two-sample") -> GofReport:
    """Largest per-cause sup-distance; threshold ``1.628 sqrt((n+m)/(n m))``."""
    _reject_absurd(a)
    _reject_absurd(b)
    a, b = as_minima(a), as_minima(b)
    n, k = a.n_effective, b.n_effective
    per_cause = {c.value: two_sample_distance(a, b, c) for c in (Cause.Y_FIRST, Cause.W_FIRST)}
    worst = max(per_cause, key=per_cause.get)
    return GofReport(
        experiment,
        "BOTH",
        per_cause[worst],
        n,
        TWO_SAMPLE_C * math.sqrt((n + k) / (n * k)),
        details={"per_cause": per_cause, "m": k, "worst_cause": worst},
    )


def h1_invariance_test(
    m1: TreatmentModel, m2: TreatmentModel, n: int, seed: int, coupled: bool = False, workers: int = 1
) -> GofReport:
    """Compare identified-minimum distributions of two models that differ only in ``h1``.

    Batches come from independent streams unless ``coupled`` is set.
    """
    if m1.hW != m2.hW or m1.h0 != m2.h0:
        raise PreconditionError("h1 invariance compares models that share hW and h0")
    return _compare_models(m1, m2, n, seed, coupled, workers, "h1-invariance")


def _compare_models(m1, m2, n, seed, coupled, workers, experiment) -> GofReport:
    if coupled:
        b1, b2 = coupled_sample(m1, m2, n, seed, workers=workers)
    else:
        b1 = sample_batch(m1, n, seed, Mode.CORRECT, workers=workers, stream=0)
        b2 = sample_batch(m2, n, seed, Mode.CORRECT, workers=workers, stream=1)
    return two_sample_gof(b1, b2, experiment)


def h0_contrast_test(m1: TreatmentModel, m2: TreatmentModel, n: int, seed: int, workers: int = 1) -> GofReport:
    """Same two-sample check for models differing in ``h0``; expected to reject."""
    return _compare_models(m1, m2, n, seed, False, workers, "h0-contrast")


class RegressionResult(NamedTuple):
    slope: float
    intercept: float
    n_selected: int
    slope_se: float
    intercept_se: float


def naive_selected_regression(pairs) -> RegressionResult:
    """OLS of y on w over pairs with y > w.

    Only a demonstration: conditioning on y > w selects the sample, and the
    fitted line does not estimate a structural treatment effect.
    """
    if not isinstance(pairs, DurationBatch):
        pairs = DurationBatch.from_pairs(list(pairs))
    sel = pairs.y > pairs.w
    w, y = pairs.w[sel], pairs.y[sel]
    k = len(w)
    if k < 2:
        raise DomainError(f"need at least 2 pairs with y > w, got {k}")
    wm, ym = w.mean(), y.mean()
    dw = w - wm
    sxx = float(np.dot(dw, dw))
    if sxx == 0:
        raise DomainError("selected treatment times are all equal")
    slope = float(np.dot(dw, y - ym)) / sxx
    intercept = float(ym - slope * wm)
    if k > 2:
        resid = y - (intercept + slope * w)
        s2 = float(np.dot(resid, resid)) / (k - 2)
        slope_se = math.sqrt(s2 / sxx)
        intercept_se = math.sqrt(s2 * (1.0 / k + wm * wm / sxx))
    else:
        slope_se = intercept_se = float("nan")
    return RegressionResult(slope, intercept, k, slope_se, intercept_se)

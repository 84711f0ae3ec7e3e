"""Homogeneous treatment-timing model.

Treatment arrives at W with hazard ``hW``. The outcome Y has hazard ``h0``
while untreated (y <= W) and ``h1`` afterwards (y > W). Everything here is
closed form except the sub-survival integrals, which go through
:mod:`treatdur.quadrature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from treatdur.hazards import DomainError, HazardSpec, _as_time, _out
from treatdur.quadrature import EPSABS, integrate

# exp(-30) ~ 9e-14: tail mass dropped by the truncated sub-survival integrals
TAIL_HAZARD = 30.0


@dataclass(frozen=True)
class TreatmentModel:
    hW: HazardSpec
    h0: HazardSpec
    h1: HazardSpec

    def __post_init__(self):
        for name in ("hW", "h0", "h1"):
            if not isinstance(getattr(self, name), HazardSpec):
                raise DomainError(f"{name} must be a HazardSpec")

    @property
    def no_effect(self) -> bool:
        """True when pre- and post-treatment outcome hazards coincide."""
        return self.h0 == self.h1

    @property
    def all_constant(self) -> bool:
        return self.hW.is_constant and self.h0.is_constant and self.h1.is_constant

    def with_h1(self, h1: HazardSpec) -> TreatmentModel:
        return TreatmentModel(self.hW, self.h0, h1)

    def with_h0(self, h0: HazardSpec) -> TreatmentModel:
        return TreatmentModel(self.hW, h0, self.h1)

    def kinks(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.hW.breaks) | set(self.h0.breaks) | set(self.h1.breaks)))


@dataclass(frozen=True)
class InversionResult:
    """Solution of ``Lambda_{Y|W=w}(y) = x``; ``absurd`` marks a negative root."""

    y: float | np.ndarray
    absurd: bool | np.ndarray


def density_f_w(m: TreatmentModel, w):
    w = _as_time(w, "w")
    return _out(m.hW.evaluate(w) * np.exp(-m.hW.cumulative(w)))


def conditional_integrated_hazard(m: TreatmentModel, w, y):
    w = _as_time(w, "w")
    y = _as_time(y, "y")
    pre = m.h0.cumulative(y)
    post = m.h0.cumulative(w) + (m.h1.cumulative(y) - m.h1.cumulative(w))
    return _out(np.where(y <= w, pre, post))


def flawed_integrated_hazard(m: TreatmentModel, w, y):
    """Mis-signed integrated hazard: below ``w`` the post-treatment hazard is
    integrated backwards from ``w`` instead of using ``h0`` from 0.

    Collapses to :func:`conditional_integrated_hazard` when ``h0 == h1``; that
    case is returned in closed form so the two agree bit for bit.
    """
    w = _as_time(w, "w")
    y = _as_time(y, "y")
    if m.no_effect:
        return conditional_integrated_hazard(m, w, y)
    lw0 = m.h0.cumulative(w)
    lw1 = m.h1.cumulative(w)
    below = lw0 - (lw1 - m.h1.cumulative(y))
    above = lw0 + (m.h1.cumulative(y) - lw1)
    return _out(np.where(y < w, below, above))


def invert_conditional(m: TreatmentModel, w, x, flawed: bool = False) -> InversionResult:
    """Solve the (correct or flawed) conditional integrated hazard for ``y``.

    In flawed mode a negative root is returned as is, with ``absurd`` set. The
    post-treatment hazard is extended below 0 by its first-segment rate.
    """
    w = _as_time(w, "w")
    x = _as_time(x, "x")
    w, x = np.broadcast_arrays(w, x)
    lw0 = m.h0.cumulative(w)
    lw1 = m.h1.cumulative(w)
    pre = x < lw0
    # post-treatment branch is shared by both modes
    y_post = m.h1.inverse_cumulative(lw1 + np.where(pre, 0.0, x - lw0))
    y_post = np.maximum(y_post, w)
    below_w = np.nextafter(w, -np.inf)
    if not flawed or m.no_effect:
        y_pre = np.minimum(m.h0.inverse_cumulative(np.where(pre, x, 0.0)), below_w)
        absurd = np.zeros(np.shape(x), dtype=bool)
    else:
        z = x - lw0 + lw1
        absurd = pre & (z < 0)
        y_pre = np.where(
            z < 0,
            z / m.h1.rates[0],
            np.minimum(m.h1.inverse_cumulative(np.maximum(z, 0.0)), below_w),
        )
    y = np.where(pre, y_pre, y_post)
    if np.ndim(y) == 0:
        return InversionResult(float(y), bool(absurd))
    return InversionResult(y, absurd)


def density_f_y_given_w(m: TreatmentModel, w, y):
    w = _as_time(w, "w")
    y = _as_time(y, "y")
    pre = m.h0.evaluate(y) * np.exp(-m.h0.cumulative(y))
    post = m.h1.evaluate(y) * np.exp(
        -m.h0.cumulative(w) - (m.h1.cumulative(y) - m.h1.cumulative(w))
    )
    return _out(np.where(y <= w, pre, post))


def subdensity_y_first(m: TreatmentModel, y):
    if type(y) is float and y >= 0:
        return m.h0.evaluate(y) * math.exp(-m.h0.cumulative(y) - m.hW.cumulative(y))
    y = _as_time(y, "y")
    return _out(m.h0.evaluate(y) * np.exp(-m.h0.cumulative(y) - m.hW.cumulative(y)))


def subdensity_w_first(m: TreatmentModel, w):
    if type(w) is float and w >= 0:
        return m.hW.evaluate(w) * math.exp(-m.hW.cumulative(w) - m.h0.cumulative(w))
    w = _as_time(w, "w")
    return _out(m.hW.evaluate(w) * np.exp(-m.hW.cumulative(w) - m.h0.cumulative(w)))


def _truncation(m: TreatmentModel, t: float) -> float:
    return m.hW.inverse_cumulative(m.hW.cumulative(t) + TAIL_HAZARD)


def subsurvival_y_first_quadrature(
    m: TreatmentModel, y: float, upper_truncation: float | None = None, epsabs: float = EPSABS
) -> float:
    """Pr(Y > y, Y < W) as the integral over treatment times ``w > y`` of
    ``[S0(y) - S0(w)] f_W(w)``.

    The default truncation point puts ``exp(-30)`` of the conditional
    treatment-time mass beyond it.
    """
    y = float(_as_time(y, "y"))
    upper = _truncation(m, y) if upper_truncation is None else float(upper_truncation)
    if upper <= y:
        return 0.0
    s0_y = math.exp(-m.h0.cumulative(y))
    h0, hW = m.h0, m.hW

    def integrand(w):
        return (s0_y - math.exp(-h0.cumulative(w))) * hW.evaluate(w) * math.exp(-hW.cumulative(w))

    return integrate(integrand, y, upper, points=m.kinks(), epsabs=epsabs)


def subsurvival_w_first_quadrature(
    m: TreatmentModel, w: float, upper_truncation: float | None = None, epsabs: float = EPSABS
) -> float:
    """Pr(W > w, W < Y): integral over ``t > w`` of ``S0(t) f_W(t)``."""
    w = float(_as_time(w, "w"))
    upper = _truncation(m, w) if upper_truncation is None else float(upper_truncation)
    if upper <= w:
        return 0.0
    h0, hW = m.h0, m.hW

    def integrand(t):
        return math.exp(-h0.cumulative(t)) * hW.evaluate(t) * math.exp(-hW.cumulative(t))

    return integrate(integrand, w, upper, points=m.kinks(), epsabs=epsabs)


def predicted_absurd_rate(m: TreatmentModel, epsabs: float = EPSABS) -> float:
    """Probability that the flawed inversion has a negative root.

    Given W = w the root is negative iff the exponential draw falls below
    ``Lambda0(w) - Lambda1(w)``; average that over the law of W.
    """
    if m.no_effect:
        return 0.0
    h0, h1, hW = m.h0, m.h1, m.hW

    def integrand(w):
        gap = h0.cumulative(w) - h1.cumulative(w)
        if gap <= 0:
            return 0.0
        return -math.expm1(-gap) * hW.evaluate(w) * math.exp(-hW.cumulative(w))

    upper = _truncation(m, 0.0)
    return integrate(integrand, 0.0, upper, points=m.kinks(), epsabs=epsabs)

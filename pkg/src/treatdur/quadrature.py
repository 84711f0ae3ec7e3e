"""Adaptive Gauss-Kronrod integration split at known kinks."""

from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable

from scipy import integrate as _integrate

EPSABS = 1e-10
EPSREL = 1e-12


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    points: Iterable[float] = (),
    epsabs: float = EPSABS,
    epsrel: float = EPSREL,
    limit: int = 200,
) -> float:
    """Integrate ``f`` over ``[a, b]`` (``b`` may be ``inf``).

    The interval is cut at every entry of ``points`` strictly inside it, so
    jumps in ``f`` or its derivatives land on panel edges. Raises
    :class:`QuadratureError` when QUADPACK reports non-convergence.
    """
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    if a == b:
        return 0.0
    cuts = sorted({p for p in points if a < p < b and math.isfinite(p)})
    edges = [a, *cuts, b]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", _integrate.IntegrationWarning)
            try:
                val, err = _integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
            except _integrate.IntegrationWarning as exc:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    _, err = _integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
                raise QuadratureError(f"no convergence on [{lo}, {hi}]: {exc}", err) from None
        pieces.append(val)
    return math.fsum(pieces)

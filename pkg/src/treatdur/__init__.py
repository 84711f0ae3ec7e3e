"""Simulation and numerical checks for treatment-timing duration models."""

from treatdur.hazards import DomainError, HazardSpec, constant, piecewise
from treatdur.model import InversionResult, TreatmentModel
from treatdur.sampling import DurationBatch, DurationPair, Mode, coupled_sample, sample_batch, sample_pair
from treatdur.competing_risks import Cause, IdentifiedMinimum, MinimumBatch, analytic_subsurvival, identify_minimum, identify_minima
from treatdur.stats import GofReport, SubsurvivalCurve, empirical_subsurvival, gof_subsurvival, h1_invariance_test, naive_selected_regression

__version__ = "0.1.0"

__all__ = [
    "Cause",
    "DomainError",
    "DurationBatch",
    "DurationPair",
    "GofReport",
    "HazardSpec",
    "IdentifiedMinimum",
    "InversionResult",
    "MinimumBatch",
    "Mode",
    "SubsurvivalCurve",
    "TreatmentModel",
    "analytic_subsurvival",
    "constant",
    "coupled_sample",
    "empirical_subsurvival",
    "gof_subsurvival",
    "h1_invariance_test",
    "identify_minima",
    "identify_minimum",
    "naive_selected_regression",
    "piecewise",
    "sample_batch",
    "sample_pair",
]

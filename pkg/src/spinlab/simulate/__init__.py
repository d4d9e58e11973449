"""Desk-scale stochastic realization of the p-spin landscape."""
from .exits import ExitStats, band_burn_in, batch_exit_times, exit_time_experiment
from .fields import (CodimOneField, CouplingField, PlantedField,
                     codim1_weights, covariant_gradient, energy_gradient,
                     plant_critical_field, sample_codim1_field,
                     sample_pure_field, MEMORY_BOUND_ENTRIES)
from .langevin import (BandSpec, DescentResult, LangevinTrace, default_dt,
                       descend_to_critical, langevin_run, overlap,
                       random_sphere_point, renormalize)
from .montecarlo import (CovarianceProbe, FreeEnergyEstimate,
                         covariance_experiment, mc_restricted_free_energy)

__all__ = [
    "ExitStats", "band_burn_in", "batch_exit_times", "exit_time_experiment",
    "CodimOneField", "CouplingField", "PlantedField", "codim1_weights",
    "covariant_gradient", "energy_gradient", "plant_critical_field",
    "sample_codim1_field", "sample_pure_field", "MEMORY_BOUND_ENTRIES",
    "BandSpec", "DescentResult", "LangevinTrace", "default_dt",
    "descend_to_critical", "langevin_run", "overlap", "random_sphere_point",
    "renormalize",
    "CovarianceProbe", "FreeEnergyEstimate", "covariance_experiment",
    "mc_restricted_free_energy",
]

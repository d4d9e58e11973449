"""Closed-form and root-finding analytics for the p-spin phase portrait."""
from .audits import AuditItem, AuditReport, identity_audits
from .bbm import (BbmOptimum, WindowPoint, bbm_maximize, envelope_audit,
                  hessian_det, separation_radius, shattering_scan,
                  shattering_window, stationarity_residual)
from .bounds import MetastabilityBounds, metastability_bounds
from .complexity import (EnergyLandmarks, asymptotic_complexity, e_infinity,
                         energy_landmarks)
from .fixed_point import (FixedPointSolution, beta_star, lhs_peak,
                          solve_fixed_point)
from .free_energy import f_rs, f_tap, latitude_entropy, v_gradient, xi_slice_at_one
from .models import MixedModel, codim1_coefficients
from .temperatures import (CriticalTemperatures, critical_temperatures,
                           rs_test, t_shattering)

__all__ = [
    "AuditItem", "AuditReport", "identity_audits",
    "BbmOptimum", "WindowPoint", "bbm_maximize", "envelope_audit",
    "hessian_det", "separation_radius", "shattering_scan", "shattering_window",
    "stationarity_residual",
    "MetastabilityBounds", "metastability_bounds",
    "EnergyLandmarks", "asymptotic_complexity", "e_infinity", "energy_landmarks",
    "FixedPointSolution", "beta_star", "lhs_peak", "solve_fixed_point",
    "f_rs", "f_tap", "latitude_entropy", "v_gradient", "xi_slice_at_one",
    "MixedModel", "codim1_coefficients",
    "CriticalTemperatures", "critical_temperatures", "rs_test", "t_shattering",
]

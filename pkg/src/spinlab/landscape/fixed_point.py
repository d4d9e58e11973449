"""The band fixed-point equation and its existence threshold.

For E_0 <= E <= E_inf and beta > 0 the equation

    (1 - q^2) q^(p-2) = (-E - sqrt(E^2 - E_inf^2)) / (2 beta (p-1))

has a solution iff the right side does not exceed the maximum of the left,
which is (2/p)((p-2)/p)^((p-2)/2), attained at q = sqrt((p-2)/p).  beta_star(E)
is the beta at which equality holds.  We always return the branch with
q >= sqrt((p-2)/p), where the left side is strictly decreasing and the root
unique.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NoSolution
from .complexity import check_order, e_infinity, energy_landmarks

RESIDUAL_TOL = 1e-10
_BISECT_ITERS = 100
_EXISTENCE_SLACK = 1e-9  # relative slack before declaring NoSolution
_Q_CAP = 1.0 - 1e-12


@dataclass(frozen=True)
class FixedPointSolution:
    energy: float
    beta: float
    q_star: float
    residual: float


def lhs_peak(p: int) -> float:
    """max_q (1-q^2) q^(p-2) = (2/p)((p-2)/p)^((p-2)/2)."""
    return (2.0 / p) * ((p - 2) / p) ** ((p - 2) / 2.0)


def fixed_point_rhs(p: int, energy: float, beta: float):
    """Right side of the fixed-point equation; requires E <= E_inf."""
    e_inf = e_infinity(p)
    energy = np.asarray(energy, dtype=float)
    if np.any(energy > e_inf * (1.0 - 1e-14)):
        raise DomainError(f"fixed point needs E <= E_inf = {e_inf}")
    disc = np.maximum(energy * energy - e_inf * e_inf, 0.0)
    return (-energy - np.sqrt(disc)) / (2.0 * beta * (p - 1))


def beta_star(p: int, energy: float) -> float:
    """Smallest beta at which the fixed-point equation is solvable at E.

    Domain: E_0 <= E <= E_inf (up to roundoff slack).
    """
    check_order(p)
    lm = energy_landmarks(p)
    slack = 1e-9 * (lm.e_infinity - lm.e_zero)
    if not (lm.e_zero - slack <= energy <= lm.e_infinity + slack):
        raise DomainError(
            f"beta_star domain is [E_0, E_inf] = [{lm.e_zero}, {lm.e_infinity}], "
            f"got E={energy}")
    energy = min(max(energy, lm.e_zero), lm.e_infinity)
    return float(fixed_point_rhs(p, energy, 1.0)) / lhs_peak(p)


def _q_lhs(p: int, q):
    return (1.0 - q * q) * q ** (p - 2)


def q_star_grid(p: int, energy, beta: float) -> np.ndarray:
    """Vectorized root on the decreasing branch for an array of energies.

    Energies must already be feasible (rhs <= peak up to slack); values are
    clamped onto the peak so the threshold case lands exactly on
    sqrt((p-2)/p).
    """
    check_order(p)
    rhs = np.atleast_1d(fixed_point_rhs(p, energy, beta))
    peak = lhs_peak(p)
    if np.any(rhs > peak * (1.0 + _EXISTENCE_SLACK)):
        raise NoSolution(
            f"no q solves the fixed point at beta={beta}: rhs exceeds the "
            f"maximum {peak} of (1-q^2)q^(p-2)")
    # Within a relative hair of the existence threshold the root is the
    # argmax itself; snapping there keeps q_star(E, beta_star(E)) exact
    # instead of absorbing sqrt(ulp) noise from the quadratic peak.
    at_peak = rhs >= peak * (1.0 - 1e-13)
    rhs = np.minimum(rhs, peak)
    q_peak = math.sqrt((p - 2) / p)
    lo = np.full(rhs.shape, q_peak)
    hi = np.full(rhs.shape, _Q_CAP)
    if np.any(_q_lhs(p, hi) > rhs):
        raise NoSolution("fixed-point root would exceed the q < 1 cap")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        take = _q_lhs(p, mid) >= rhs
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    return np.where(at_peak, q_peak, 0.5 * (lo + hi))


def solve_fixed_point(p: int, energy: float, beta: float) -> FixedPointSolution:
    """Unique root with q >= sqrt((p-2)/p); q**(beta) is the E = E_inf case.

    Raises NoSolution for beta < beta_star(E).  The documented domain is
    E_0 <= E <= E_inf; energies below E_0 are accepted and follow the same
    analytic expression (the equation itself does not involve E_0).
    """
    check_order(p)
    if beta <= 0.0:
        raise DomainError("beta must be positive")
    q = float(q_star_grid(p, energy, beta)[0])
    residual = abs(_q_lhs(p, q) - float(fixed_point_rhs(p, energy, beta)))
    return FixedPointSolution(energy=float(energy), beta=float(beta),
                              q_star=q, residual=residual)

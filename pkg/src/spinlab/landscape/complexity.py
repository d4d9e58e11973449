"""Annealed complexity curve of the pure p-spin landscape and its landmarks.

The complexity of critical points below normalized energy E has three
branches.  With E_inf = -2 sqrt((p-1)/p):

    theta(E) = 1/2 log(p-1) - (p-2) E^2 / (4(p-1))
               - (2/E_inf^2) * int_E^{E_inf} sqrt(z^2 - E_inf^2) dz,   E <= E_inf
    theta(E) = 1/2 log(p-1) - (p-2) E^2 / (4(p-1)),          E_inf <= E <= 0
    theta(E) = 1/2 log(p-1),                                           E >= 0

E_0 denotes the zero of theta; theta is strictly increasing on (-inf, E_inf],
so E_0 < E_inf and the root is simple.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad

from ..errors import DomainError

QUAD_ABS_TOL = 1e-12
E_ZERO_TOL = 1e-10
# E_0 always lies within 2 units below E_inf for the orders in scope.
E_ZERO_BRACKET_WIDTH = 2.0


def check_order(p: int) -> int:
    """Validate the interaction order; all in-scope formulas assume p >= 3."""
    if int(p) != p or p < 3:
        raise DomainError(f"interaction order must be an integer >= 3, got {p!r}")
    return int(p)


def e_infinity(p: int) -> float:
    """Threshold energy -2 sqrt((p-1)/p) separating the complexity branches."""
    check_order(p)
    return -2.0 * math.sqrt((p - 1) / p)


def _tail_integral(p: int, energy: float) -> float:
    """int_E^{E_inf} sqrt(z^2 - E_inf^2) dz by adaptive quadrature (abs 1e-12)."""
    a = -e_infinity(p)

    def integrand(z):
        return math.sqrt(max(z * z - a * a, 0.0))

    val, err = quad(integrand, energy, e_infinity(p), epsabs=QUAD_ABS_TOL,
                    epsrel=1e-13, limit=200)
    if err > 1e-10:
        raise ArithmeticError(
            f"complexity quadrature failed to converge (err={err:.2e}) at E={energy}")
    return val


def asymptotic_complexity(p: int, energy: float) -> float:
    """Exponential growth rate of the number of critical points below N*energy."""
    check_order(p)
    energy = float(energy)
    if not math.isfinite(energy):
        raise DomainError("energy must be finite")
    half_log = 0.5 * math.log(p - 1)
    if energy >= 0.0:
        return half_log
    e_inf = e_infinity(p)
    quadratic = half_log - (p - 2) * energy * energy / (4 * (p - 1))
    if energy >= e_inf:
        return quadratic
    return quadratic - (2.0 / (e_inf * e_inf)) * _tail_integral(p, energy)


@dataclass(frozen=True)
class EnergyLandmarks:
    """Landmark energies of the complexity curve (per-spin units)."""
    e_infinity: float
    e_zero: float
    theta_at_e_infinity: float


@lru_cache(maxsize=None)
def energy_landmarks(p: int) -> EnergyLandmarks:
    """Closed-form E_inf plus E_0 located by bisection of theta to 1e-10.

    Raises ArithmeticError if the bracket [E_inf - 2, E_inf] does not straddle
    a sign change, which would indicate a quadrature bug rather than a bad
    input.
    """
    check_order(p)
    e_inf = e_infinity(p)
    lo, hi = e_inf - E_ZERO_BRACKET_WIDTH, e_inf
    f_lo = asymptotic_complexity(p, lo)
    f_hi = asymptotic_complexity(p, hi)
    if not (f_lo < 0.0 < f_hi):
        raise ArithmeticError(
            f"E_0 bracket lost its sign change for p={p}: "
            f"theta({lo})={f_lo}, theta({hi})={f_hi}")
    while hi - lo > E_ZERO_TOL:
        mid = 0.5 * (lo + hi)
        if asymptotic_complexity(p, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return EnergyLandmarks(e_infinity=e_inf, e_zero=0.5 * (lo + hi),
                           theta_at_e_infinity=f_hi)

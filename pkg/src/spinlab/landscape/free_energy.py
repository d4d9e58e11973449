"""Band free energies and the gradient of the band functional V.

    F_RS(E, q, beta) = -beta q^p E - I(q) + (beta^2/2)(1 - q^(2p) - p q^(2p-2)(1 - q^2))

with latitude entropy I(q) = -(1/2) log(1 - q^2).  V(E, q; beta) is F_RS plus
the complexity of the band centres, and its partial derivatives have the
factored closed forms implemented in v_gradient (the q-derivative vanishes
exactly on the fixed-point branch).
"""
import math

import numpy as np

from ..errors import DomainError, OutsideRsRegime
from .complexity import check_order, e_infinity
from .models import MixedModel
from .temperatures import rs_test

RS_GUARD_TOL = 1e-10


def latitude_entropy(q):
    """I(q) = -(1/2) log(1 - q^2); diverges as q -> 1."""
    q = np.asarray(q, dtype=float)
    return -0.5 * np.log1p(-q * q)


def _check_q(q) -> None:
    if np.any(np.asarray(q) < 0.0) or np.any(np.asarray(q) >= 1.0):
        raise DomainError(f"q must lie in [0, 1), got {q}")


def xi_slice_at_one(p: int, q):
    """f(1) of the latitude-q slice model: 1 - q^(2p) - p q^(2p-2)(1 - q^2)."""
    q = np.asarray(q, dtype=float)
    return 1.0 - q ** (2 * p) - p * q ** (2 * p - 2) * (1.0 - q * q)


def f_rs(p: int, energy: float, q: float, beta: float):
    """Replica-symmetric band free energy; accepts array q for grid work."""
    check_order(p)
    _check_q(q)
    q = np.asarray(q, dtype=float)
    out = (-beta * q ** p * energy - latitude_entropy(q)
           + 0.5 * beta * beta * xi_slice_at_one(p, q))
    return float(out) if out.ndim == 0 else out


def f_tap(p: int, energy: float, q: float, beta: float) -> float:
    """Band free energy -beta q^p E + F_2(q, beta) - I(q), in the regime where
    the slice model is replica symmetric so F_2 collapses to the closed form.

    Verifies the RS certificate for the latitude-q slice first and refuses to
    return a value otherwise: outside that regime F_2 would need a 1-RSB
    solver, which is out of scope.
    """
    check_order(p)
    _check_q(q)
    guard = rs_test(MixedModel.codim1(p, float(q)), beta)
    if guard > RS_GUARD_TOL:
        raise OutsideRsRegime(
            f"slice model at q={q} is not replica symmetric at beta={beta} "
            f"(test value {guard:.3e} > 0); F_2 has no closed form here")
    return f_rs(p, energy, q, beta)


def v_gradient(p: int, energy: float, q: float, beta: float):
    """Closed-form (dV/dE, dV/dq) of V = F_RS + theta, valid for E <= E_inf.

    dV/dq factors through the fixed-point equation:

        dV/dq = -(beta^2 p (p-1) q / (1-q^2)) (f(q) - A-) (f(q) - A+),
        A-+   = (-E -+ sqrt(E^2 - E_inf^2)) / (2 beta (p-1)),

    so it vanishes exactly at q = q_star(E, beta).  At E = E_inf the
    E-derivative is the left derivative.
    """
    check_order(p)
    _check_q(q)
    e_inf = e_infinity(p)
    if energy > e_inf * (1.0 - 1e-14):
        raise DomainError(f"v_gradient needs E <= E_inf = {e_inf}")
    s = math.sqrt(max(energy * energy - e_inf * e_inf, 0.0))
    a_minus = (-energy - s) / (2.0 * beta * (p - 1))
    a_plus = (-energy + s) / (2.0 * beta * (p - 1))
    fq = (1.0 - q * q) * q ** (p - 2)
    dv_dq = (-(beta * beta * p * (p - 1) * q / (1.0 - q * q))
             * (fq - a_minus) * (fq - a_plus))
    dv_de = -beta * q ** p - energy + p * (energy + s) / (2.0 * (p - 1))
    return dv_de, dv_dq

"""Spectral-gap and exit-probability bound calculators for metastable bands.

Given a 1-Lipschitz observable with an eps-free-energy barrier of height N*h
(N*h > log 4), the spectral gap obeys

    lambda_1 <= (K/eps)^2 e^{-Nh} / (1 - 4 e^{-Nh}),

and for an eta-free-energy well of the same height the probability of exiting
before time T is at most  c' (1 + eta^{-4} N h T) e^{-Nh}, valid when

    eta <= sqrt(C' h / (1 + beta K)).

The universal constants c', C' are not pinned down by the theory; they are
configurable here and default to 1.
"""
import math
from dataclasses import dataclass

from ..errors import DomainError

# Guard margin: at N*h this close to log 4 the denominator cancels
# catastrophically, so we treat it as outside the domain of validity.
_LOG4_MARGIN = 1e-8


@dataclass(frozen=True)
class MetastabilityBounds:
    gap_bound: float
    exit_prob_bound: float
    eta_ok: bool


def metastability_bounds(K: float, eps: float, N: int, h: float, beta: float,
                         T_horizon: float, eta: float,
                         c_prime: float = 1.0,
                         C_prime: float = 1.0) -> MetastabilityBounds:
    """Evaluate both bound calculators and the eta admissibility test."""
    for name, val in (("K", K), ("eps", eps), ("N", N), ("h", h),
                      ("beta", beta), ("T_horizon", T_horizon), ("eta", eta),
                      ("c_prime", c_prime), ("C_prime", C_prime)):
        if not val > 0.0:
            raise DomainError(f"{name} must be positive, got {val}")
    nh = N * h
    if nh <= math.log(4.0) + _LOG4_MARGIN:
        raise DomainError(
            f"gap bound requires N*h > log 4; got N*h = {nh}")
    decay = math.exp(-nh)
    gap_bound = (K / eps) ** 2 * decay / (1.0 - 4.0 * decay)
    exit_prob_bound = c_prime * (1.0 + eta ** -4 * nh * T_horizon) * decay
    eta_ok = eta <= math.sqrt(C_prime * h / (1.0 + beta * K))
    return MetastabilityBounds(gap_bound=gap_bound,
                               exit_prob_bound=exit_prob_bound,
                               eta_ok=eta_ok)

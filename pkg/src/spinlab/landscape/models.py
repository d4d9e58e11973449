"""Mixed-model covariance polynomials f(t) = sum_k a_k^2 t^k.

The pure model is f(t) = t^p.  Slicing the landscape at latitude q around a
point produces the mixed model with coefficients

    a_k^2 = C(p, k) (1 - q^2)^k q^(2(p-k)),   k = 2..p,

whose polynomial sums to the closed form

    f(t) = ((1 - q^2) t + q^2)^p - q^(2p) - p (1 - q^2) t q^(2p-2).
"""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

K_MIN = 2  # lowest interaction order carried by any model in scope


def codim1_coefficients(p: int, q: float) -> np.ndarray:
    """Squared slice weights a_k^2 for k = 2..p at latitude q."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"latitude q must lie in [0, 1], got {q}")
    one_minus = 1.0 - q * q
    ks = np.arange(K_MIN, p + 1)
    return np.array([math.comb(p, int(k)) * one_minus ** int(k) * q ** (2 * (p - int(k)))
                     for k in ks])


@dataclass(frozen=True)
class MixedModel:
    """Covariance polynomial, coefficients a_k^2 indexed k = 2..p."""
    coeffs: tuple

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise DomainError("coeffs must be a non-empty 1-d sequence")
        if np.any(c < 0.0):
            raise DomainError("covariance coefficients a_k^2 must be >= 0")
        if not np.any(c > 0.0):
            raise DomainError("at least one covariance coefficient must be > 0")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))

    @classmethod
    def pure(cls, p: int) -> "MixedModel":
        c = [0.0] * (p - K_MIN + 1)
        c[-1] = 1.0
        return cls(tuple(c))

    @classmethod
    def codim1(cls, p: int, q: float) -> "MixedModel":
        return cls(tuple(codim1_coefficients(p, q)))

    @property
    def p(self) -> int:
        return K_MIN + len(self.coeffs) - 1

    @property
    def f1(self) -> float:
        """f(1) = sum of coefficients (the variance per spin)."""
        return float(sum(self.coeffs))

    def _full_coeffs(self) -> np.ndarray:
        return np.concatenate([np.zeros(K_MIN), np.asarray(self.coeffs)])

    def f(self, t):
        """Evaluate f(t); accepts scalars or arrays."""
        return np.polynomial.polynomial.polyval(t, self._full_coeffs())

    def derivative(self, t, order: int = 1):
        """order-th derivative of f at t, from the coefficient sum."""
        c = self._full_coeffs()
        dc = np.polynomial.polynomial.polyder(c, order)
        return np.polynomial.polynomial.polyval(t, dc)

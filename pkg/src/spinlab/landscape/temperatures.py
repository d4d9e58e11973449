"""Replica-symmetry test and the critical temperatures.

A model f is replica symmetric at inverse temperature beta iff

    g(t) = beta^2 f(t) + log(1 - t) + t <= 0   on [0, 1).

g(0) = 0 always, so the returned maximum is >= 0 and equals 0 exactly
throughout the RS phase; the static transition beta_s is the largest beta
at which it is still 0.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .complexity import check_order, e_infinity, energy_landmarks
from .fixed_point import beta_star
from .models import MixedModel

RS_GRID_POINTS = 10_000
_T_CAP = 1.0 - 1e-12
BETA_S_BRACKET = (1e-3, 10.0)
BETA_S_TOL = 1e-8
_POSITIVE_TOL = 1e-12

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fn, a: float, b: float, iters: int = 90):
    """Golden-section maximum of a unimodal fn on [a, b]."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
        if b - a < 1e-14:
            break
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _rs_scan(model: MixedModel, beta: float):
    """(max value, argmax) of g over [0, 1 - 1e-12], grid scan + refinement."""
    t = np.linspace(0.0, _T_CAP, RS_GRID_POINTS)
    g = beta * beta * model.f(t) + np.log1p(-t) + t
    i = int(np.argmax(g))
    best_t, best_g = float(t[i]), float(g[i])
    if 0 < i < t.size - 1:
        fn = lambda x: beta * beta * float(model.f(x)) + math.log1p(-x) + x
        xt, xg = _golden_max(fn, float(t[i - 1]), float(t[i + 1]))
        if xg > best_g:
            best_t, best_g = xt, xg
    return best_g, best_t


def rs_test(model: MixedModel, beta: float) -> float:
    """max_t g(t); <= 0 certifies F(beta; f) = beta^2 f(1) / 2."""
    if beta < 0.0:
        raise ValueError("beta must be non-negative")
    if beta == 0.0:
        return 0.0
    return _rs_scan(model, beta)[0]


def t_shattering(p: int) -> float:
    """Closed form sqrt(p (p-2)^(p-2) / (p-1)^(p-1))."""
    check_order(p)
    return math.sqrt(p * float(p - 2) ** (p - 2) / float(p - 1) ** (p - 1))


@dataclass(frozen=True)
class CriticalTemperatures:
    t_s: float
    t_sh: float
    t_bbm: float
    t_beta_star_einf: float


@lru_cache(maxsize=None)
def critical_temperatures(p: int) -> CriticalTemperatures:
    """All four temperatures; t_s by bisection on the RS test of the pure model.

    The bisection is on the condition max g > 0, which flips exactly once
    because g is increasing in beta pointwise.
    """
    check_order(p)
    model = MixedModel.pure(p)
    lo, hi = BETA_S_BRACKET
    if rs_test(model, lo) > _POSITIVE_TOL or rs_test(model, hi) <= _POSITIVE_TOL:
        raise ArithmeticError(f"beta_s bracket {BETA_S_BRACKET} invalid for p={p}")
    while hi - lo > BETA_S_TOL:
        mid = 0.5 * (lo + hi)
        if rs_test(model, mid) > _POSITIVE_TOL:
            hi = mid
        else:
            lo = mid
    beta_s = 0.5 * (lo + hi)
    lm = energy_landmarks(p)
    return CriticalTemperatures(
        t_s=1.0 / beta_s,
        t_sh=t_shattering(p),
        t_bbm=1.0 / beta_star(p, lm.e_zero),
        t_beta_star_einf=1.0 / beta_star(p, e_infinity(p)),
    )

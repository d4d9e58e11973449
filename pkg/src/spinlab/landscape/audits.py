"""Randomized audits of the algebraic identities behind the phase portrait.

Four certificates, each checked at random draws against an independent
evaluation path:

  rule_of_signs    3 xi'''^2 - 2 xi'' xi'''' of the latitude-q slice model,
                   coefficient-sum derivatives vs the closed form
                   (p-2)(p-1)^2 p^3 (1-q^2)^6 (q^2 + (1-q^2) t)^(2p-6);
                   non-negative, so the slice is at most 1-RSB.
  q_star_curvature termwise d2/dq2 F_RS at q_star(E, beta) vs the closed form
                   [(2 - p(1-q^2))/(1-q^2)^2][((-E - sqrt(E^2-E_inf^2))/E_inf)^2 - 1],
                   which must also be negative (q_star is a strict max).
  marginal_rs      g(t) = beta_sh^2 t^p + log(1-t) + t stays <= 0 on [0, 1)
                   and its derivative vanishes at t = (p-2)/(p-1).
  gradient_fd      closed-form v_gradient vs central finite differences of
                   F_RS + theta.
"""
import math
from dataclasses import dataclass

import numpy as np

from .._rng import stream
from .complexity import asymptotic_complexity, check_order, e_infinity, energy_landmarks
from .fixed_point import beta_star, solve_fixed_point
from .free_energy import f_rs, v_gradient
from .models import MixedModel
from .temperatures import t_shattering

RULE_OF_SIGNS_REL_TOL = 1e-9
CURVATURE_REL_TOL = 1e-9
MARGINAL_RS_TOL = 1e-8
GRADIENT_FD_REL_TOL = 1e-6
_FD_STEP = 1e-5


@dataclass(frozen=True)
class AuditItem:
    name: str
    passed: bool
    max_residual: float
    threshold: float
    worst_case: tuple | None


@dataclass(frozen=True)
class AuditReport:
    p: int
    samples: int
    seed: int
    items: tuple

    @property
    def all_passed(self) -> bool:
        return all(item.passed for item in self.items)

    @property
    def first_failure(self) -> AuditItem | None:
        for item in self.items:
            if not item.passed:
                return item
        return None


def _rule_of_signs(p: int, samples: int, rng) -> AuditItem:
    worst, worst_case = 0.0, None
    for _ in range(samples):
        t = float(rng.uniform(0.0, 1.0))
        q = float(rng.uniform(0.02, 0.98))
        model = MixedModel.codim1(p, q)
        lhs = 3.0 * model.derivative(t, 3) ** 2 - 2.0 * model.derivative(t, 2) * model.derivative(t, 4)
        rhs = ((p - 2) * (p - 1) ** 2 * p ** 3 * (1.0 - q * q) ** 6
               * (q * q + (1.0 - q * q) * t) ** (2 * p - 6))
        rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
        if rel > worst:
            worst, worst_case = rel, (t, q)
    return AuditItem("rule_of_signs", worst <= RULE_OF_SIGNS_REL_TOL, worst,
                     RULE_OF_SIGNS_REL_TOL, worst_case)


def _d2q_frs_termwise(p: int, energy: float, q: float, beta: float) -> float:
    """Second q-derivative of F_RS assembled term by term."""
    t1 = -beta * p * (p - 1) * q ** (p - 2) * energy
    t2 = -(1.0 + q * q) / (1.0 - q * q) ** 2
    d2_poly = (-2 * p * (2 * p - 1) * q ** (2 * p - 2)
               - p * ((2 * p - 2) * (2 * p - 3) * q ** (2 * p - 4) * (1.0 - q * q)
                      - (8 * p - 6) * q ** (2 * p - 2)))
    return t1 + t2 + 0.5 * beta * beta * d2_poly


def _q_star_curvature(p: int, samples: int, rng) -> AuditItem:
    lm = energy_landmarks(p)
    span = lm.e_infinity - lm.e_zero
    worst, worst_case = 0.0, None
    for _ in range(samples):
        energy = float(rng.uniform(lm.e_zero + 1e-4 * span, lm.e_infinity - 1e-3 * span))
        beta = beta_star(p, energy) * (1.0 + float(rng.uniform(0.05, 2.0)))
        q = solve_fixed_point(p, energy, beta).q_star
        termwise = _d2q_frs_termwise(p, energy, q, beta)
        s = math.sqrt(energy * energy - lm.e_infinity ** 2)
        ratio = (-energy - s) / lm.e_infinity
        closed = ((2.0 - p * (1.0 - q * q)) / (1.0 - q * q) ** 2) * (ratio * ratio - 1.0)
        rel = abs(termwise - closed) / max(abs(closed), 1e-300)
        if termwise >= 0.0:
            rel = math.inf  # the curvature must be strictly negative
        if rel > worst:
            worst, worst_case = rel, (energy, beta, q)
    return AuditItem("q_star_curvature", worst <= CURVATURE_REL_TOL, worst,
                     CURVATURE_REL_TOL, worst_case)


def _marginal_rs(p: int, samples: int, rng) -> AuditItem:
    beta_sh = 1.0 / t_shattering(p)
    worst, worst_case = 0.0, None
    draws = rng.uniform(0.0, 1.0 - 1e-12, size=samples)
    grid = np.linspace(0.0, 1.0 - 1e-12, 4096)
    for t in np.concatenate([draws, grid]):
        g = beta_sh ** 2 * t ** p + math.log1p(-t) + t
        if g > worst:
            worst, worst_case = g, (float(t),)
    t_c = (p - 2) / (p - 1)
    deriv = beta_sh ** 2 * p * t_c ** (p - 1) - 1.0 / (1.0 - t_c) + 1.0
    residual = max(worst, abs(deriv))
    if abs(deriv) > worst:
        worst_case = (t_c, "derivative")
    return AuditItem("marginal_rs", residual <= MARGINAL_RS_TOL, residual,
                     MARGINAL_RS_TOL, worst_case)


def _gradient_fd(p: int, samples: int, rng, theta_fn) -> AuditItem:
    lm = energy_landmarks(p)
    span = lm.e_infinity - lm.e_zero
    h = _FD_STEP
    worst, worst_case = 0.0, None
    for _ in range(samples):
        energy = float(rng.uniform(lm.e_zero, lm.e_infinity - 0.01 * max(span, 1.0)))
        q = float(rng.uniform(0.05, 0.95))
        beta = float(rng.uniform(0.2, 2.5))
        an_de, an_dq = v_gradient(p, energy, q, beta)
        v = lambda e, qq: f_rs(p, e, qq, beta) + theta_fn(p, e)
        fd_de = (v(energy + h, q) - v(energy - h, q)) / (2 * h)
        fd_dq = (v(energy, q + h) - v(energy, q - h)) / (2 * h)
        rel = max(abs(fd_de - an_de) / (1.0 + abs(an_de)),
                  abs(fd_dq - an_dq) / (1.0 + abs(an_dq)))
        if rel > worst:
            worst, worst_case = rel, (energy, q, beta)
    return AuditItem("gradient_fd", worst <= GRADIENT_FD_REL_TOL, worst,
                     GRADIENT_FD_REL_TOL, worst_case)


def identity_audits(p: int, samples: int, seed: int = 0,
                    _tamper: bool = False) -> AuditReport:
    """Run all four certificate audits at `samples` random draws each.

    `_tamper` perturbs the complexity curve used in the finite-difference
    item; it exists as a negative control so the CLI audit can prove it
    still detects a broken landscape.
    """
    check_order(p)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = stream(seed, "identity-audits", p)
    theta_fn = asymptotic_complexity
    if _tamper:
        theta_fn = lambda pp, e: asymptotic_complexity(pp, e) + 1e-3 * (e - energy_landmarks(pp).e_zero)
    items = (
        _rule_of_signs(p, samples, rng),
        _q_star_curvature(p, samples, rng),
        _marginal_rs(p, samples, rng),
        _gradient_fd(p, samples, rng, theta_fn),
    )
    return AuditReport(p=p, samples=samples, seed=seed, items=items)

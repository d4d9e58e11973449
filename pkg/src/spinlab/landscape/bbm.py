"""Maximization of the band functional V(E, q; beta) = F_RS + theta.

Feasible set at inverse temperature beta: energies E in [E_0, E_inf] with
beta > beta_star(E), and for each such E the overlaps [q_star(E, beta), 1].
On that strip dV/dq <= 0, so the inner maximum sits at q_star(E, beta) and
the problem reduces to a 1-d maximization over E, refined by golden section
and polished with Newton on the stationarity system

    (1 - q^2) q^(p-2) = (-E - sqrt(E^2 - E_inf^2)) / (2 beta (p-1)),
    E = -beta (q^p + p (1 - q^2) q^(p-2)).

Inside the shattering window the maximum is interior with value beta^2 / 2.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DomainError, EmptyFeasibleSet, EmptyWindow
from .complexity import asymptotic_complexity, e_infinity, energy_landmarks
from .fixed_point import beta_star, fixed_point_rhs, lhs_peak, q_star_grid
from .free_energy import f_rs, v_gradient
from .temperatures import _golden_max, critical_temperatures

E_GRID_POINTS = 2000
GRID_TIE_TOL = 1e-9          # prefer the smaller E among grid maxima this close
NEWTON_TOL = 1e-13
GRAD_NORM_INTERIOR = 1e-8
WINDOW_GRID_POINTS = 500
WINDOW_VALUE_TOL = 1e-6
SEPARATION_IOTA = 1e-3


@dataclass(frozen=True)
class BbmOptimum:
    E_opt: float
    q_opt: float
    value: float
    grad_norm: float
    hessian_det: float
    interior: bool
    stationarity_residual: float


@lru_cache(maxsize=None)
def _theta_grid(p: int):
    """Cached complexity values on the master E-grid over [E_0, E_inf]."""
    lm = energy_landmarks(p)
    grid = np.linspace(lm.e_zero, lm.e_infinity, E_GRID_POINTS)
    theta = np.array([asymptotic_complexity(p, float(e)) for e in grid])
    return grid, theta


def _feasible_cut(p: int, beta: float) -> tuple[float, bool]:
    """Upper energy edge of the feasible set and whether it is E_inf itself."""
    e_inf = e_infinity(p)
    if beta > beta_star(p, e_inf):
        return e_inf, True
    # beta_star is increasing in E, so the cut solves beta_star(E) = beta.
    lm = energy_landmarks(p)
    lo, hi = lm.e_zero, e_inf
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if beta_star(p, mid) < beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


def _v_at(p: int, energy: float, beta: float) -> tuple[float, float]:
    """(V, q_star) of the inner-maximized functional at one energy."""
    q = float(q_star_grid(p, energy, beta)[0])
    return f_rs(p, energy, q, beta) + asymptotic_complexity(p, energy), q


def stationarity_residual(p: int, energy: float, q: float, beta: float) -> float:
    return abs(energy + beta * (q ** p + p * (1.0 - q * q) * q ** (p - 2)))


def hessian_det(p: int, energy: float, q: float, beta: float) -> float:
    """det D^2 V on the q = q_star manifold (closed form)."""
    e_inf = e_infinity(p)
    s = math.sqrt(max(energy * energy - e_inf * e_inf, 0.0))
    fq = (1.0 - q * q) * q ** (p - 2)
    term_q = beta * p * p * q ** (p - 2) / (1.0 - q * q) * (q * q - (p - 2) / p)
    return (s + beta * p * fq) * term_q - (beta * p * q ** (p - 1)) ** 2


def _newton_polish(p: int, energy: float, q: float, beta: float):
    """Newton on (fixed point, dV/dE = 0); returns (E, q, converged)."""
    lm = energy_landmarks(p)
    e_inf = lm.e_infinity
    e_lo, e_hi = lm.e_zero, e_inf - 1e-13
    q_lo, q_hi = math.sqrt((p - 2) / p) + 1e-12, 1.0 - 1e-9
    for _ in range(60):
        s = math.sqrt(max(energy * energy - e_inf * e_inf, 1e-300))
        g1 = (1.0 - q * q) * q ** (p - 2) - float(fixed_point_rhs(p, energy, beta))
        g2 = -beta * q ** p - energy + p * (energy + s) / (2.0 * (p - 1))
        if max(abs(g1), abs(g2)) < NEWTON_TOL:
            return energy, q, True
        d_ratio = 1.0 + energy / s
        j11 = d_ratio / (2.0 * beta * (p - 1))          # dG1/dE
        j12 = q ** (p - 3) * ((p - 2) - p * q * q)      # dG1/dq
        j21 = -1.0 + p * d_ratio / (2.0 * (p - 1))      # dG2/dE
        j22 = -beta * p * q ** (p - 1)                  # dG2/dq
        det = j11 * j22 - j12 * j21
        if not math.isfinite(det) or abs(det) < 1e-300:
            return energy, q, False
        de = (g1 * j22 - g2 * j12) / det
        dq = (g2 * j11 - g1 * j21) / det
        energy = min(max(energy - de, e_lo), e_hi)
        q = min(max(q - dq, q_lo), q_hi)
    return energy, q, False


def bbm_maximize(p: int, beta: float) -> BbmOptimum:
    """Maximize V over the feasible strip; raises EmptyFeasibleSet for
    T >= T_BBM, where no energy level admits a band overlap."""
    lm = energy_landmarks(p)
    if beta <= beta_star(p, lm.e_zero):
        raise EmptyFeasibleSet(
            f"no E in [E_0, E_inf] has beta > beta_star(E) at beta={beta} "
            f"(T >= T_BBM = {1.0 / beta_star(p, lm.e_zero)})")
    e_cut, full_range = _feasible_cut(p, beta)

    grid, theta = _theta_grid(p)
    if full_range:
        sel = slice(None)
    else:
        # strict T < beta_star(E)^-1: stay a hair inside the cut
        sel = grid <= e_cut - 1e-12 * (lm.e_infinity - lm.e_zero)
    energies = grid[sel]
    if energies.size < 2:
        energies = np.linspace(lm.e_zero, e_cut - 1e-12, 8)
        theta_sel = np.array([asymptotic_complexity(p, float(e)) for e in energies])
    else:
        theta_sel = theta[sel]
    qs = q_star_grid(p, energies, beta)
    values = f_rs(p, energies, qs, beta) + theta_sel
    # values is computed with energy as array: f_rs broadcasts over (E, q) pairs
    best = float(np.max(values))
    candidates = np.nonzero(values >= best - GRID_TIE_TOL)[0]
    idx = int(candidates[0])  # smallest E among ties

    # V is flat near its peak, so several cells can tie within the tolerance;
    # refine over a bracket that covers all of them.
    a = float(energies[max(int(candidates[0]) - 1, 0)])
    b = float(energies[min(int(candidates[-1]) + 1, energies.size - 1)])
    e_gold, _ = _golden_max(lambda e: _v_at(p, e, beta)[0], a, b)

    q_gold = float(q_star_grid(p, e_gold, beta)[0])
    e_star, q_star, converged = _newton_polish(p, e_gold, q_gold, beta)
    slack = 2.0 * (b - a) + 1e-12
    if not converged or not (a - slack <= e_star <= b + slack) \
            or not (lm.e_zero <= e_star <= e_cut):
        e_star, q_star = e_gold, q_gold

    value = f_rs(p, e_star, q_star, beta) + asymptotic_complexity(p, e_star)
    dv_de, dv_dq = v_gradient(p, e_star, q_star, beta)
    grad_norm = math.hypot(dv_de, dv_dq)
    span = lm.e_infinity - lm.e_zero
    margin = 1e-7 * span
    interior = (lm.e_zero + margin < e_star < e_cut - margin
                and grad_norm <= GRAD_NORM_INTERIOR)
    return BbmOptimum(E_opt=e_star, q_opt=q_star, value=value,
                      grad_norm=grad_norm,
                      hessian_det=hessian_det(p, e_star, q_star, beta),
                      interior=interior,
                      stationarity_residual=stationarity_residual(p, e_star, q_star, beta))


def _d_frs_d_beta(p: int, energy: float, q: float, beta: float) -> float:
    """Closed-form temperature derivative of F_RS; equals beta at a
    stationary point because E = -beta(q^p + p(1-q^2)q^(p-2)) there."""
    return (-q ** p * energy + beta
            - q ** p * (beta * q ** p + beta * p * q ** (p - 2) * (1.0 - q * q)))


ENVELOPE_ANALYTIC_TOL = 1e-10


def envelope_audit(p: int, beta_grid) -> float:
    """max |G'(beta) - beta| over the grid by central differences, where
    G(beta) is the maximized band functional.

    Also re-derives the analytic identity dF_RS/dbeta = beta at every interior
    optimum and checks det D^2 V > 0 there, failing loudly on either.
    Propagates EmptyFeasibleSet from the maximization.
    """
    betas = np.asarray(sorted(float(b) for b in beta_grid))
    if betas.size < 3:
        raise DomainError("envelope audit needs at least 3 grid points")
    temps = critical_temperatures(p)
    if betas[0] <= 1.0 / temps.t_sh - 1e-9 or betas[-1] >= 1.0 / temps.t_s + 1e-9:
        raise DomainError(
            f"beta grid must lie inside the window ({1.0 / temps.t_sh}, "
            f"{1.0 / temps.t_s}) for p={p}")
    g_vals = np.empty(betas.size)
    for i, b in enumerate(betas):
        opt = bbm_maximize(p, float(b))
        g_vals[i] = opt.value
        if opt.interior:
            analytic = _d_frs_d_beta(p, opt.E_opt, opt.q_opt, float(b))
            if abs(analytic - b) > ENVELOPE_ANALYTIC_TOL:
                raise ArithmeticError(
                    f"analytic envelope identity violated at beta={b}: "
                    f"dF_RS/dbeta = {analytic}")
            if opt.hessian_det <= 0.0:
                raise ArithmeticError(
                    f"Hessian determinant not positive at beta={b}")
    deriv = (g_vals[2:] - g_vals[:-2]) / (betas[2:] - betas[:-2])
    return float(np.max(np.abs(deriv - betas[1:-1])))


def separation_radius(p: int) -> float:
    """Design choice D5: overlap separation the shattered bands must clear."""
    if p == 3:
        return (p - 3) / (p - 1) + SEPARATION_IOTA
    return (p - 4) / p + SEPARATION_IOTA


@dataclass(frozen=True)
class WindowPoint:
    T: float
    beta: float
    optimum: BbmOptimum
    theta_opt: float
    certified: bool


def shattering_scan(p: int, grid_points: int = WINDOW_GRID_POINTS,
                    value_tol: float = WINDOW_VALUE_TOL) -> list:
    """Certificate scan on a temperature grid over (T_s, T_sh].

    A point is certified when the maximizer is interior, the value equals
    beta^2/2 within value_tol, the complexity at the optimal energy is
    positive, and the optimal overlap clears the separation radius.
    """
    temps = critical_temperatures(p)
    r = separation_radius(p)
    q_min = math.sqrt((1.0 + r) / 2.0)
    lm = energy_landmarks(p)
    rows = []
    step = (temps.t_sh - temps.t_s) / grid_points
    for i in range(1, grid_points + 1):
        T = temps.t_s + i * step
        beta = 1.0 / T
        opt = bbm_maximize(p, beta)
        theta_opt = asymptotic_complexity(p, opt.E_opt)
        certified = (opt.interior
                     and abs(opt.value - 0.5 * beta * beta) <= value_tol
                     and theta_opt > 0.0
                     and opt.E_opt > lm.e_zero
                     and opt.q_opt > q_min)
        rows.append(WindowPoint(T=T, beta=beta, optimum=opt,
                                theta_opt=theta_opt, certified=certified))
    return rows


def shattering_window(p: int, grid_points: int = WINDOW_GRID_POINTS,
                      value_tol: float = WINDOW_VALUE_TOL) -> tuple[float, float]:
    """(t_lo, t_hi]: t_lo = T_s and t_hi the largest scanned T such that every
    grid temperature below it is certified.  Raises EmptyWindow if even the
    first grid point fails, which signals a regression."""
    rows = shattering_scan(p, grid_points=grid_points, value_tol=value_tol)
    t_hi = None
    for row in rows:
        if not row.certified:
            break
        t_hi = row.T
    if t_hi is None:
        raise EmptyWindow(f"no grid temperature above T_s is certified for p={p}")
    return critical_temperatures(p).t_s, t_hi

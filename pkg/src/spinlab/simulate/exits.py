"""Exit-time experiments from bands around planted critical points.

Replicas start from an approximation of the Gibbs measure conditioned on the
band (latitude-stratified draw followed by a Metropolis burn-in restricted to
the band), then evolve under Langevin dynamics until they first leave the
band or hit the horizon.  Horizon hits are reported as censored lower bounds,
never dropped: dropping them would bias metastability measurements downward.
"""
import math
from dataclasses import dataclass

import numpy as np

from .._rng import child_seed, stream
from ..errors import DomainError
from .fields import energy_gradient, plant_critical_field
from .langevin import BandSpec, default_dt, overlap, renormalize, step_batch
from .montecarlo import _band_points

BURN_IN_STEPS = 10_000


@dataclass(frozen=True)
class ExitStats:
    n_replicas: int
    exit_times: np.ndarray       # min(first exit, horizon), physical time
    censored: np.ndarray         # True where the horizon was hit first
    mean_log_exit: float         # censored entries enter at the horizon (lower bound)
    horizon: float
    burn_in_steps: int

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.censored))

    @property
    def mean_exit(self) -> float:
        return float(np.mean(self.exit_times))


def band_burn_in(field, band: BandSpec, beta: float, replicas: int, seed: int,
                 steps: int = BURN_IN_STEPS) -> np.ndarray:
    """Metropolis chain inside the band, one independent stream per replica.

    The proposal scale targets O(1) energy moves, beta |grad H| sigma ~ 1;
    proposals leaving the band are rejected, which is the conditioning.
    """
    n = field.n_coords
    rng_init = stream(seed, "burnin-init")
    t0 = rng_init.uniform(band.q - band.eta, band.q + band.eta, size=replicas)
    X = _band_points(band, t0, n, rng_init)
    _, g = energy_gradient(field, X)
    gnorm = float(np.mean(np.linalg.norm(g, axis=1)))
    sigma = min(0.2, max(1e-3, 1.0 / (beta * max(gnorm, 1e-9))))
    gens = [stream(seed, "burnin", r) for r in range(replicas)]
    energies = np.atleast_1d(field.energy(X))
    block = 512
    done = 0
    while done < steps:
        m = min(block, steps - done)
        noise = np.stack([g_.standard_normal((m, n)) for g_ in gens], axis=1)
        unif = np.stack([g_.random(m) for g_ in gens], axis=1)
        for s in range(m):
            prop = renormalize(X + sigma * noise[s])
            e_prop = np.atleast_1d(field.energy(prop))
            inside = np.abs(overlap(prop, band.center) - band.q) <= band.eta
            accept = inside & (np.log(unif[s]) < -beta * (e_prop - energies))
            X = np.where(accept[:, None], prop, X)
            energies = np.where(accept, e_prop, energies)
        done += m
    return X


def batch_exit_times(field, band: BandSpec, T: float, X0: np.ndarray,
                     dt: float, horizon: float, seed: int) -> ExitStats:
    """Integrate replicas until band exit or horizon; per-replica noise streams."""
    replicas, n = X0.shape
    steps = max(1, int(math.ceil(horizon / dt)))
    gens = [stream(seed, "exit-noise", r) for r in range(replicas)]
    X = X0.copy()
    exit_time = np.full(replicas, horizon)
    alive = np.ones(replicas, dtype=bool)
    block = 256
    step = 0
    while step < steps and np.any(alive):
        m = min(block, steps - step)
        noise = np.stack([g_.standard_normal((m, n)) for g_ in gens], axis=1)
        for s in range(m):
            Xn, _ = step_batch(field, X, T, dt, noise[s])
            X = np.where(alive[:, None], Xn, X)
            out = ~band.contains(X) & alive
            if np.any(out):
                exit_time[out] = (step + s + 1) * dt
                alive &= ~out
            if not np.any(alive):
                break
        step += m
    censored = alive.copy()
    return ExitStats(
        n_replicas=replicas,
        exit_times=exit_time,
        censored=censored,
        mean_log_exit=float(np.mean(np.log(exit_time))),
        horizon=horizon,
        burn_in_steps=BURN_IN_STEPS,
    )


def exit_time_experiment(p: int, N_list, energy: float, T: float, q: float,
                         eta: float, replicas: int, horizon: float, seed: int,
                         dt: float | None = None,
                         burn_in: int = BURN_IN_STEPS) -> dict:
    """Per-N exit statistics from the band B(pole, q, eta) of a planted field.

    The band latitude q should be the fixed-point overlap q_star(E, 1/T) from
    the analytics (the CLI enforces this unless overridden).  Monotone growth
    of mean_log_exit in N is the desk-scale surrogate for the exponential
    escape-time claim.
    """
    if replicas < 1 or horizon <= 0.0:
        raise DomainError("replicas must be >= 1 and horizon positive")
    beta = 1.0 / T
    results = {}
    for N in N_list:
        field = plant_critical_field(p, int(N), energy, child_seed(seed, "plant", int(N)))
        band = BandSpec(center=field.center, q=q, eta=eta)
        X0 = band_burn_in(field, band, beta, replicas,
                          child_seed(seed, "burnin", int(N)), steps=burn_in)
        dt_n = dt if dt is not None else default_dt(field, T, X0[0])
        results[int(N)] = batch_exit_times(
            field, band, T, X0, dt_n, horizon, child_seed(seed, "exit", int(N)))
    return results

"""Sphere-constrained Langevin dynamics and gradient descent.

The SDE dX = dB - (1/T) grad H dt on the sphere of radius sqrt(n) is
integrated by projected Euler-Maruyama: tangent-space drift and noise, then
renormalization back onto the sphere after every step.  Replicas evolve on
disjoint counter-based noise streams keyed by (seed, replica index), so a
trajectory is reproducible regardless of how replicas are batched.
"""
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .._rng import stream
from ..errors import DomainError, NotConverged, Unstable
from .fields import covariant_gradient, energy_gradient

DRIFT_CAP_FRACTION = 0.25      # Unstable when |drift step| > sqrt(n)/4
DESCENT_GRAD_TOL = 1e-8        # converged when |covariant grad| <= tol * n
_NOISE_BLOCK = 256             # steps of noise drawn per replica at a time


def random_sphere_point(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the sphere of radius sqrt(n)."""
    z = rng.standard_normal(n)
    return z * (math.sqrt(n) / np.linalg.norm(z))


def renormalize(X: np.ndarray) -> np.ndarray:
    """Rescale rows onto the sphere of radius sqrt(n)."""
    single = X.ndim == 1
    if single:
        X = X[None, :]
    n = X.shape[1]
    norms = np.linalg.norm(X, axis=1)
    out = X * (math.sqrt(n) / norms)[:, None]
    return out[0] if single else out


def check_on_sphere(x: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if abs(np.linalg.norm(x) - math.sqrt(n)) > rel_tol * math.sqrt(n):
        raise DomainError("state is not on the sphere of radius sqrt(n)")
    return x


def overlap(X: np.ndarray, center: np.ndarray) -> np.ndarray:
    """R(x, c) = (x . c)/n, batched over rows of X."""
    n = center.size
    return (X @ center) / n


@dataclass(frozen=True)
class BandSpec:
    """Spherical annulus {y : |R(center, y) - q| <= eta}."""
    center: np.ndarray
    q: float
    eta: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"band latitude must be in (0, 1), got {self.q}")
        if not 0.0 < self.eta < min(self.q, 1.0 - self.q) / 2.0:
            raise DomainError(
                f"band half-width must satisfy 0 < eta < min(q, 1-q)/2, got "
                f"eta={self.eta} at q={self.q}")

    def contains(self, X: np.ndarray) -> np.ndarray:
        return np.abs(overlap(np.atleast_2d(X), self.center) - self.q) <= self.eta


def default_dt(field, T: float, x0: np.ndarray) -> float:
    """dt = 0.01 T / (1 + |grad H(x0)| / n), recomputed per run."""
    _, g = energy_gradient(field, x0)
    g = np.atleast_2d(g)
    gnorm = float(np.max(np.linalg.norm(g, axis=1)))
    return 0.01 * T / (1.0 + gnorm / field.n_coords)


class _ReplicaNoise:
    """Per-replica Philox streams, drawn in blocks."""

    def __init__(self, seed: int, replica_ids, n: int):
        self._gens = [stream(seed, "langevin-noise", int(r)) for r in replica_ids]
        self._n = n
        self._buf = None
        self._pos = 0

    def next_block(self) -> None:
        self._buf = np.stack([g.standard_normal((_NOISE_BLOCK, self._n))
                              for g in self._gens], axis=1)
        self._pos = 0

    def draw(self) -> np.ndarray:
        if self._buf is None or self._pos >= _NOISE_BLOCK:
            self.next_block()
        z = self._buf[self._pos]
        self._pos += 1
        return z


def step_batch(field, X: np.ndarray, T: float, dt: float,
               noise: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """One projected Euler-Maruyama step for a batch; returns (X', energies)."""
    n = field.n_coords
    energies, g = field.energy_and_gradient(X)
    gc = covariant_gradient(X, g)
    drift = -(dt / T) * gc
    drift_norm = np.linalg.norm(drift, axis=1)
    cap = DRIFT_CAP_FRACTION * math.sqrt(n)
    if np.any(drift_norm > cap):
        bad = int(np.argmax(drift_norm))
        raise Unstable(
            f"drift step |dt/T * grad| = {drift_norm[bad]:.3g} exceeds "
            f"sqrt(n)/4 = {cap:.3g}; reduce dt")
    Xn = X + drift
    if noise is not None:
        radial = np.einsum("ri,ri->r", X, noise) / n
        tangent = noise - radial[:, None] * X
        Xn = Xn + math.sqrt(dt) * tangent
    return renormalize(Xn), np.atleast_1d(energies)


@dataclass
class LangevinTrace:
    dt: float
    steps: int
    record_every: int
    times: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray | None
    exit_time: float | None
    exited: bool
    x_final: np.ndarray = dc_field(repr=False)


def langevin_run(field, T: float, x0: np.ndarray, dt: float, steps: int,
                 seed: int, band: BandSpec | None = None,
                 noise: bool = True, record_every: int | None = None) -> LangevinTrace:
    """Single trajectory; records energy (and overlap/exit when band given).

    With noise=False this is plain projected gradient flow, along which the
    energy is non-increasing for small enough dt.
    """
    x0 = check_on_sphere(x0)
    if dt <= 0.0 or steps < 1:
        raise DomainError("dt must be positive and steps >= 1")
    if record_every is None:
        record_every = max(1, steps // 2048)
    gen = _ReplicaNoise(seed, [0], field.n_coords) if noise else None
    X = x0[None, :].copy()
    times, energies, overlaps = [], [], []
    exit_time, exited = None, False
    for step in range(steps):
        z = gen.draw() if noise else None  # shape (1, n)
        X, e = step_batch(field, X, T, dt, z)
        t_now = (step + 1) * dt
        if band is not None and not exited:
            if not band.contains(X)[0]:
                exit_time, exited = t_now, True
        if step % record_every == 0 or step == steps - 1:
            times.append(t_now)
            energies.append(float(e[0]))
            if band is not None:
                overlaps.append(float(overlap(X, band.center)[0]))
    return LangevinTrace(
        dt=dt, steps=steps, record_every=record_every,
        times=np.asarray(times), energies=np.asarray(energies),
        overlaps=np.asarray(overlaps) if band is not None else None,
        exit_time=exit_time, exited=exited, x_final=X[0])


@dataclass(frozen=True)
class DescentResult:
    x: np.ndarray
    grad_norm: float
    energy: float
    iterations: int


def descend_to_critical(field, x0: np.ndarray, max_iters: int = 50_000) -> DescentResult:
    """Projected gradient descent with backtracking until
    |covariant grad| <= 1e-8 * n; raises NotConverged carrying the best
    iterate otherwise.  The accepted energy never increases."""
    x = check_on_sphere(np.array(x0, dtype=float))
    n = field.n_coords
    tol = DESCENT_GRAD_TOL * n
    energy, g = energy_gradient(field, x)
    gnorm = float(np.linalg.norm(g))
    alpha = 1.0 / (1.0 + gnorm / math.sqrt(n))
    iters = 0
    while gnorm > tol and iters < max_iters:
        iters += 1
        moved = False
        while alpha > 1e-18:
            trial = renormalize(x - alpha * g)
            e_t, g_t = energy_gradient(field, trial)
            if e_t <= energy - 1e-4 * alpha * gnorm ** 2 / n:
                x, energy, g = trial, e_t, g_t
                gnorm = float(np.linalg.norm(g))
                alpha = min(alpha * 1.3, 1e3)
                moved = True
                break
            alpha *= 0.5
        if not moved:
            break  # step underflow: as converged as float64 allows
    result = DescentResult(x=x, grad_norm=gnorm, energy=energy, iterations=iters)
    if gnorm > tol:
        raise NotConverged(
            f"descent stalled at |grad| = {gnorm:.3e} after {iters} iterations",
            result=result)
    return result

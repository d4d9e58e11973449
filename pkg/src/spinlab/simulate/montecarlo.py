"""Monte Carlo estimators: restricted free energies and covariance checks.

The restricted free energy (1/N) log int_A e^{-beta H} dx (normalized uniform
measure) is estimated by importance sampling.  On the full sphere the design
is uniform (unit weights, antithetic +-x pairs when the field is odd).  On a
band the latitude t is drawn uniformly over [q-eta, q+eta] and reweighted by
the exact overlap marginal

    rho(t) = (1 - t^2)^((n-3)/2) / B(1/2, (n-1)/2),

the co-area density of the latitude coordinate on an n-coordinate sphere.
The effective sample size is that of the design weights; it collapses only
when the band reweighting degenerates, and the estimator refuses to report
in that case.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .._rng import child_seed, stream
from ..errors import DegenerateSample, DomainError
from .fields import sample_codim1_field, sample_pure_field
from .langevin import BandSpec, random_sphere_point

MIN_SAMPLES = 1_000
MIN_ESS = 50.0
_CHUNK_SCALARS = 2 ** 24  # cap on rows * n^(p-1) per contraction chunk


@dataclass(frozen=True)
class FreeEnergyEstimate:
    estimate: float
    std_err: float
    ess: float
    n_samples: int


def _log_latitude_density(t: np.ndarray, n: int) -> np.ndarray:
    log_beta = math.lgamma(0.5) + math.lgamma((n - 1) / 2.0) - math.lgamma(n / 2.0)
    return ((n - 3) / 2.0) * np.log1p(-t * t) - log_beta


def _chunk_rows(field) -> int:
    per_row = field.n_coords ** max(getattr(field, "p", 2) - 1, 1)
    return max(256, min(65536, _CHUNK_SCALARS // max(per_row, 1)))


def _band_points(band: BandSpec, t: np.ndarray, n: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Points with prescribed overlaps t against the band centre."""
    c_hat = band.center / np.linalg.norm(band.center)
    z = rng.standard_normal((t.size, n))
    z -= np.outer(z @ c_hat, c_hat)
    z /= np.linalg.norm(z, axis=1)[:, None]
    return math.sqrt(n) * (t[:, None] * c_hat[None, :]
                           + np.sqrt(1.0 - t * t)[:, None] * z)


def mc_restricted_free_energy(field, beta: float, band: BandSpec | None,
                              n_samples: int, seed: int) -> FreeEnergyEstimate:
    """(1/N) log of the importance-sampled restricted partition function,
    with a delta-method standard error on the same scale."""
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"n_samples must be >= {MIN_SAMPLES}")
    if beta < 0.0:
        raise DomainError("beta must be >= 0")
    n = field.n_coords
    norm = getattr(field, "N", n)  # free energies divide by the logical N
    rng = stream(seed, "mc-free-energy")
    chunk = _chunk_rows(field)
    log_terms = []   # log(w_i e^{-beta H_i}) per sample
    log_weights = []
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        if band is None:
            Z = rng.standard_normal((m, n))
            X = Z * (math.sqrt(n) / np.linalg.norm(Z, axis=1))[:, None]
            h = np.atleast_1d(field.energy(X))
            if field.is_odd:
                # e^{-beta H(x)} averaged with e^{-beta H(-x)} = e^{+beta H(x)}
                log_terms.append(np.logaddexp(-beta * h, beta * h) - math.log(2.0))
            else:
                log_terms.append(-beta * h)
            log_weights.append(np.zeros(m))
        else:
            t = rng.uniform(band.q - band.eta, band.q + band.eta, size=m)
            X = _band_points(band, t, n, rng)
            h = np.atleast_1d(field.energy(X))
            lw = math.log(2.0 * band.eta) + _log_latitude_density(t, n)
            log_terms.append(lw - beta * h)
            log_weights.append(lw)
        done += m
    log_terms = np.concatenate(log_terms)
    log_weights = np.concatenate(log_weights)

    ess = float(np.exp(2.0 * logsumexp(log_weights) - logsumexp(2.0 * log_weights)))
    if ess < MIN_ESS:
        raise DegenerateSample(
            f"importance design collapsed: effective sample size {ess:.1f} < {MIN_ESS}")

    log_mean = logsumexp(log_terms) - math.log(n_samples)
    estimate = log_mean / norm
    # delta method: Var[(1/N) log m-hat] ~ Var[a] / (n mean[a]^2), shifted stably
    shift = float(np.max(log_terms))
    a = np.exp(log_terms - shift)
    rel_std = float(np.std(a) / (np.mean(a) * math.sqrt(n_samples)))
    return FreeEnergyEstimate(estimate=float(estimate),
                              std_err=rel_std / norm,
                              ess=ess, n_samples=n_samples)


@dataclass(frozen=True)
class CovarianceProbe:
    model: str
    q: float | None
    overlap: float
    empirical: float
    exact: float
    std_err: float

    @property
    def z_score(self) -> float:
        return abs(self.empirical - self.exact) / self.std_err


DEFAULT_PROBE_OVERLAPS = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)


def _probe_pair(n: int, r: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.zeros(n)
    x[0] = math.sqrt(n)
    y = np.zeros(n)
    y[0] = r * math.sqrt(n)
    y[1] = math.sqrt(n * (1.0 - r * r))
    return x, y


def covariance_experiment(p: int, N: int, n_draws: int, seed: int,
                          overlaps=DEFAULT_PROBE_OVERLAPS,
                          codim_qs=(0.3, 0.7)) -> list:
    """Empirical Cov(H(x), H(y))/N over independent field draws against the
    covariance polynomials: R^p for the pure model, xi(R, q) for the slices."""
    probes = []
    # pure model on N coordinates
    pairs = [_probe_pair(N, r) for r in overlaps]
    prods = np.empty((n_draws, len(overlaps)))
    for i in range(n_draws):
        f = sample_pure_field(p, N, child_seed(seed, "cov-pure", i))
        for j, (x, y) in enumerate(pairs):
            prods[i, j] = f.energy(x) * f.energy(y)
    for j, r in enumerate(overlaps):
        emp = prods[:, j] / N
        probes.append(CovarianceProbe(
            model="pure", q=None, overlap=r,
            empirical=float(np.mean(emp)), exact=r ** p,
            std_err=float(np.std(emp) / math.sqrt(n_draws))))
    # slice models on N-1 coordinates; overlap normalized by N-1
    for q in codim_qs:
        pairs = [_probe_pair(N - 1, r) for r in overlaps]
        prods = np.empty((n_draws, len(overlaps)))
        for i in range(n_draws):
            f = sample_codim1_field(p, q, N, child_seed(seed, "cov-codim", q, i))
            for j, (x, y) in enumerate(pairs):
                prods[i, j] = f.energy(x) * f.energy(y)
        for j, r in enumerate(overlaps):
            emp = prods[:, j] / N
            exact = float(((1.0 - q * q) * r + q * q) ** p - q ** (2 * p)
                          - p * (1.0 - q * q) * r * q ** (2 * p - 2))
            probes.append(CovarianceProbe(
                model="codim1", q=q, overlap=r,
                empirical=float(np.mean(emp)), exact=exact,
                std_err=float(np.std(emp) / math.sqrt(n_draws))))
    return probes


"""Gaussian coupling fields on spheres of radius sqrt(dim).

A pure order-k field on n coordinates is

    H(x) = n^{-(k-1)/2} sum_{i_1..i_k} J_{i_1..i_k} x_{i_1} ... x_{i_k}

with unsymmetrized i.i.d. standard normal couplings, so that
Cov(H(x), H(y)) = n ((x.y)/n)^k.  The co-dimension-1 field combines
independent pure fields of orders 2..p on the equatorial sphere with the
latitude weights alpha_k(q), and the planted field realizes the law of the
landscape conditioned on the north pole being a critical point with energy
N*E: it is the smooth polynomial

    H(x) = N E q(x)^p + sum_k sqrt(C(p,k)) q(x)^{p-k} N^{-(k-1)/2} <J_k, x_perp^k>

with q(x) = x_1 / sqrt(N), which pins H(n) = N E and kills the covariant
gradient at the pole exactly.
"""
import math
import struct

import numpy as np

from .._rng import child_seed, stream
from ..errors import DomainError, MemoryBound

MEMORY_BOUND_ENTRIES = 2 ** 28
_TENSOR_MAGIC = b"SPNTENS1"


def _check_tensor_budget(k: int, n: int) -> None:
    if n < 2:
        raise DomainError(f"need at least 2 coordinates, got n={n}")
    if n ** k > MEMORY_BOUND_ENTRIES:
        raise MemoryBound(
            f"tensor with {n}^{k} entries exceeds the 2^28 desk-scale cap")


def _batched(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asanyarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


class CouplingField:
    """Pure order-k Gaussian field on the sphere of radius sqrt(n)."""

    def __init__(self, k: int, n: int, seed: int, tensor: np.ndarray):
        self.p = int(k)
        self.n = int(n)
        self.seed = int(seed)
        self.tensor = tensor
        self.scale = float(n) ** (-(k - 1) / 2.0)
        self._slot_sum = None

    @property
    def n_coords(self) -> int:
        return self.n

    @property
    def is_odd(self) -> bool:
        return self.p % 2 == 1

    # -- raw contractions (no n-dependent prefactor) --------------------
    def _slot_matrix(self) -> np.ndarray:
        # sum over open slots of the tensor with that slot moved first,
        # flattened to (n, n^(k-1)); one GEMM then yields the full gradient.
        if self._slot_sum is None:
            k, n = self.p, self.n
            s = np.zeros((n, n ** (k - 1)))
            for m in range(k):
                s += np.moveaxis(self.tensor, m, 0).reshape(n, -1)
            self._slot_sum = s
        return self._slot_sum

    def _outer_power(self, X: np.ndarray, order: int) -> np.ndarray:
        """Row-wise flattened outer product x^(order), shape (R, n^order)."""
        out = X
        for _ in range(order - 1):
            out = np.einsum("ra,rj->raj", out, X).reshape(X.shape[0], -1)
        return out

    def contract_and_grad(self, x):
        """Raw <J, x^k> and its raw Euclidean gradient, batched over rows.

        grad = B @ S^T with B = x^(k-1) flattened and S the slot-sum matrix;
        each slot contraction dotted with x is the full contraction, so the
        value comes free as (grad . x) / k.
        """
        X, squeeze = _batched(x)
        grad = self._outer_power(X, self.p - 1) @ self._slot_matrix().T
        val = np.einsum("ri,ri->r", grad, X) / self.p
        if squeeze:
            return float(val[0]), grad[0]
        return val, grad

    def contract(self, x):
        """Raw <J, x^k> only (value path for Monte Carlo sweeps)."""
        X, squeeze = _batched(x)
        partial = self._outer_power(X, self.p - 1) @ self.tensor.reshape(self.n, -1).T
        val = np.einsum("ri,ri->r", partial, X)
        if squeeze:
            return float(val[0])
        return val

    # -- field interface -------------------------------------------------
    def energy(self, x):
        X, squeeze = _batched(x)
        val = self.contract(X) * self.scale
        return float(val[0]) if squeeze else val

    def energy_and_gradient(self, x):
        X, squeeze = _batched(x)
        val, grad = self.contract_and_grad(X)
        val, grad = val * self.scale, grad * self.scale
        if squeeze:
            return float(val[0]), grad[0]
        return val, grad

    # -- persistence -------------------------------------------------------
    def save_tensor(self, path) -> None:
        """Little-endian float64 dump with a 32-byte (magic, p, N, seed) header."""
        header = _TENSOR_MAGIC + struct.pack(
            "<QQQ", self.p, self.n, self.seed & (2 ** 64 - 1))
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(self.tensor, dtype="<f8").tobytes())

    @classmethod
    def load_tensor(cls, path) -> "CouplingField":
        with open(path, "rb") as fh:
            header = fh.read(32)
            if len(header) != 32 or header[:8] != _TENSOR_MAGIC:
                raise DomainError(f"{path} is not a spinlab tensor dump")
            k, n, seed = struct.unpack("<QQQ", header[8:])
            data = np.frombuffer(fh.read(), dtype="<f8")
        if data.size != n ** k:
            raise DomainError(f"{path} holds {data.size} entries, expected {n}^{k}")
        return cls(int(k), int(n), int(seed), data.reshape((int(n),) * int(k)).copy())


def _make_pure(k: int, n: int, seed: int) -> CouplingField:
    _check_tensor_budget(k, n)
    tensor = stream(seed, "pure-tensor", k, n).standard_normal((n,) * k)
    return CouplingField(k, n, seed, tensor)


def sample_pure_field(p: int, N: int, seed: int) -> CouplingField:
    """Deterministic pure p-spin field; same (p, N, seed) reproduces the tensor."""
    if p < 3:
        raise DomainError(f"pure field order must be >= 3, got p={p}")
    return _make_pure(p, N, seed)


def codim1_weights(p: int, q: float) -> np.ndarray:
    """alpha_k(q) = sqrt(C(p,k) (1-q^2)^k) q^(p-k) for k = 2..p."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"latitude q must lie in [0, 1], got {q}")
    return np.array([math.sqrt(math.comb(p, k) * (1.0 - q * q) ** k) * q ** (p - k)
                     for k in range(2, p + 1)])


class CodimOneField:
    """Latitude-q slice model: weighted independent pure fields of orders 2..p
    living on the equatorial sphere (N-1 coordinates, radius sqrt(N-1)).

    Covariance is N * xi(R, q) with R the overlap normalized by N-1; the
    sqrt(N/(N-1)) factor in the weights supplies the dimension mismatch.
    """

    def __init__(self, p: int, q: float, N: int, seed: int):
        if not 0.0 <= q < 1.0:
            raise DomainError(f"latitude q must lie in [0, 1), got {q}")
        self.p = int(p)
        self.q = float(q)
        self.N = int(N)
        self.seed = int(seed)
        self.n = self.N - 1
        self.components = [
            _make_pure(k, self.n, child_seed(seed, "codim1", k))
            for k in range(2, p + 1)
        ]
        self.weights = codim1_weights(p, q) * math.sqrt(N / (N - 1))

    @property
    def n_coords(self) -> int:
        return self.n

    @property
    def is_odd(self) -> bool:
        return False

    def energy(self, x):
        X, squeeze = _batched(x)
        total = np.zeros(X.shape[0])
        for w, comp in zip(self.weights, self.components):
            if w != 0.0:
                total += w * comp.contract(X) * comp.scale
        return float(total[0]) if squeeze else total

    def energy_and_gradient(self, x):
        X, squeeze = _batched(x)
        total = np.zeros(X.shape[0])
        grad = np.zeros_like(X)
        for w, comp in zip(self.weights, self.components):
            if w == 0.0:
                continue
            val, g = comp.contract_and_grad(X)
            total += w * comp.scale * val
            grad += w * comp.scale * g
        if squeeze:
            return float(total[0]), grad[0]
        return total, grad


class PlantedField:
    """Landscape conditioned on the north pole being a critical point at
    energy N*E, extended smoothly to the whole sphere by recomputing the
    latitude weights pointwise from one set of order-k equatorial tensors."""

    def __init__(self, p: int, N: int, energy_density: float, seed: int):
        self.p = int(p)
        self.N = int(N)
        self.energy_density = float(energy_density)
        self.seed = int(seed)
        self.components = {
            k: _make_pure(k, N - 1, child_seed(seed, "planted", k))
            for k in range(2, p + 1)
        }
        self.center = np.zeros(N)
        self.center[0] = math.sqrt(N)
        # c_k(q) = sqrt(C(p,k)) q^(p-k) N^(-(k-1)/2), applied to raw <J_k, x_perp^k>
        self._coef = {k: math.sqrt(math.comb(p, k)) * float(N) ** (-(k - 1) / 2.0)
                      for k in range(2, p + 1)}

    @property
    def n_coords(self) -> int:
        return self.N

    @property
    def is_odd(self) -> bool:
        return False

    def energy(self, x):
        X, squeeze = _batched(x)
        rootN = math.sqrt(self.N)
        qs = X[:, 0] / rootN
        perp = X[:, 1:]
        total = self.N * self.energy_density * qs ** self.p
        for k, comp in self.components.items():
            total += self._coef[k] * qs ** (self.p - k) * comp.contract(perp)
        return float(total[0]) if squeeze else total

    def energy_and_gradient(self, x):
        X, squeeze = _batched(x)
        p, N = self.p, self.N
        rootN = math.sqrt(N)
        qs = X[:, 0] / rootN
        perp = X[:, 1:]
        total = N * self.energy_density * qs ** p
        grad = np.zeros_like(X)
        grad[:, 0] = rootN * self.energy_density * p * qs ** (p - 1)
        for k, comp in self.components.items():
            val, g = comp.contract_and_grad(perp)
            total += self._coef[k] * qs ** (p - k) * val
            if p - k > 0:
                grad[:, 0] += self._coef[k] * (p - k) * qs ** (p - k - 1) / rootN * val
            grad[:, 1:] += (self._coef[k] * qs ** (p - k))[:, None] * g
        if squeeze:
            return float(total[0]), grad[0]
        return total, grad


def plant_critical_field(p: int, N: int, energy: float, seed: int) -> PlantedField:
    """Field with a built-in critical point of energy N*energy at the pole.

    The physically meaningful window is roughly E_0 - 0.2 <= energy <= 0;
    outside it the conditioning describes vanishingly atypical landscapes.
    """
    if p < 3:
        raise DomainError(f"planted field order must be >= 3, got p={p}")
    if energy > 0.0:
        raise DomainError(f"planted energy density should be <= 0, got {energy}")
    _check_tensor_budget(p, N - 1)
    return PlantedField(p, N, energy, seed)


def sample_codim1_field(p: int, q: float, N: int, seed: int) -> CodimOneField:
    """Slice model at latitude q; at q=0 only the order-p term survives."""
    if p < 3:
        raise DomainError(f"slice model order must be >= 3, got p={p}")
    _check_tensor_budget(p, N - 1)
    return CodimOneField(p, q, N, seed)


def covariant_gradient(x: np.ndarray, euclidean_grad: np.ndarray) -> np.ndarray:
    """Project out the radial component: (I - x x^T / |x|^2) g, batched."""
    X, squeeze = _batched(x)
    G, _ = _batched(euclidean_grad)
    radial = np.einsum("ri,ri->r", X, G) / np.einsum("ri,ri->r", X, X)
    out = G - radial[:, None] * X
    return out[0] if squeeze else out


def energy_gradient(field, x):
    """(energy, covariant gradient) of a field at sphere state(s) x."""
    val, g = field.energy_and_gradient(x)
    return val, covariant_gradient(x, g)

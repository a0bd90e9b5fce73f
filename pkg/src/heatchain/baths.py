"""Bath coupling operators, kernels, rate matrices, and perturbation objects.

Each heat bath acts on the chain through a local surface operator Q.  In
the chain eigenbasis the bath enters only through the temperature
independent kernel

    X[n, m] = 2*pi*a0 * |<m|Q|n>|^2 * exp(-(E_n - E_m)^2 / (2*delta^2))

and the transition rates at inverse temperature beta are

    W[n, m] = X[n, m] * exp(beta/2 * (E_m - E_n))      (rate m -> n)

which obey detailed balance W[n, m] = exp(beta*(E_m - E_n)) * W[m, n].
Boltzmann's constant is set to one throughout.

The expansion of the steady state around a reference temperature t0 uses

    B[m, n] = exp(-beta0/2 * (E_m + E_n)) * X[m, n]
    A[m]    = (1/t0^2) * sum_n (E_m - E_n) * B[m, n],    sum_m A[m] = 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, SystemSpectrum, surface_indices
from .errors import ParameterError
from .seeding import substream

# Conventions: coupling strength normalized so X = |Q|^2 * gaussian at a0
# default, and a wide band (gaussian factor ~ 1 across the spectrum).
A0_DEFAULT = 1.0 / (2.0 * math.pi)
BANDWIDTH_OVER_RANGE = 10.0

Q_KINDS = ("projector", "random")
ENDS = ("left", "right")


@dataclass(frozen=True)
class BathSpec:
    """One bath: temperature, coupling strength/bandwidth, and surface recipe.

    q_kind 'projector' puts amplitude q_strength uniformly on the surface
    states (a rank-one operator); 'random' draws a symmetric Gaussian
    block of scale q_strength on them, reproducibly from q_seed.
    """

    temperature: float
    a0: float = A0_DEFAULT
    delta: float = 1.0
    end: str = "left"
    q_kind: str = "projector"
    q_strength: float = 1.0
    q_seed: int = 0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ParameterError(f"temperature={self.temperature} must be > 0")
        if not self.a0 > 0:
            raise ParameterError(f"a0={self.a0} must be > 0")
        if not self.delta > 0:
            raise ParameterError(f"bandwidth delta={self.delta} must be > 0")
        if self.end not in ENDS:
            raise ParameterError(f"end must be one of {ENDS}, got {self.end!r}")
        if self.q_kind not in Q_KINDS:
            raise ParameterError(f"q_kind must be one of {Q_KINDS}, got {self.q_kind!r}")


@dataclass(frozen=True)
class CouplingKernel:
    """Symmetric nonnegative kernel X in the eigenbasis, with its bath spec."""

    x: np.ndarray
    spec: BathSpec


@dataclass(frozen=True)
class RateMatrix:
    """Transition rates w[n, m] for m -> n at inverse temperature beta."""

    w: np.ndarray
    beta: float


@dataclass(frozen=True)
class PerturbationObjects:
    """Symmetric matrix B, zero-sum vector A, and the reference temperature t0."""

    b: np.ndarray
    a: np.ndarray
    t0: float


def default_bandwidth(spectral_range: float) -> float:
    """Wide-band default: bandwidth = 10x the spectral range estimate."""
    return BANDWIDTH_OVER_RANGE * spectral_range


def build_surface_operator(
    spec: BathSpec, params: ChainParams, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Site-basis surface operator Q for one bath.

    Q is real symmetric and supported exclusively on the n_surf surface
    states of the designated end block.  Entry values depend only on the
    recipe (kind, strength, q_seed, n_surf), not on the chain length, so
    the same spec yields the same nonzero entries for every k.
    """
    idx = surface_indices(params, spec.end)
    q = np.zeros((params.dim, params.dim))
    if spec.q_kind == "projector":
        u = np.full(idx.size, 1.0 / math.sqrt(idx.size))
        q[np.ix_(idx, idx)] = spec.q_strength * np.outer(u, u)
    else:
        if rng is None:
            rng = substream(spec.q_seed)
        a = rng.standard_normal((idx.size, idx.size))
        q[np.ix_(idx, idx)] = spec.q_strength * 0.5 * (a + a.T)
    return q


def coupling_kernel(q: np.ndarray, spec: BathSpec, spectrum: SystemSpectrum) -> CouplingKernel:
    """Rotate Q to the eigenbasis and build the kernel X.

    Exploits the surface support of Q (only rows touching nonzero entries
    participate), so the rotation costs O(n_surf * dim^2).
    """
    q = np.asarray(q, dtype=float)
    dim = spectrum.energies.size
    if q.shape != (dim, dim):
        raise ParameterError(f"operator shape {q.shape} does not match spectrum dim {dim}")

    support = np.nonzero(np.any(q != 0.0, axis=1))[0]
    if support.size == 0:
        q_eig = np.zeros((dim, dim))
    else:
        rows = spectrum.modes[support, :]
        q_eig = rows.T @ q[np.ix_(support, support)] @ rows

    e = spectrum.energies
    de = e[:, None] - e[None, :]
    gauss = np.exp(-0.5 * (de / spec.delta) ** 2)
    x = 2.0 * math.pi * spec.a0 * q_eig**2 * gauss
    x = 0.5 * (x + x.T)  # bit-exact symmetry (matmul roundoff is not symmetric)
    return CouplingKernel(x=x, spec=spec)


def rate_matrix(x: CouplingKernel, temperature: float, spectrum: SystemSpectrum) -> RateMatrix:
    """Transition rates W at the given bath temperature."""
    if not temperature > 0:
        raise ParameterError(f"temperature={temperature} must be > 0")
    beta = 1.0 / temperature
    e = spectrum.energies
    w = x.x * np.exp(0.5 * beta * (e[None, :] - e[:, None]))
    return RateMatrix(w=w, beta=beta)


def perturbation_objects(x: CouplingKernel, t0: float, spectrum: SystemSpectrum) -> PerturbationObjects:
    """B and A of the first-order expansion around temperature t0."""
    if not t0 > 0:
        raise ParameterError(f"reference temperature t0={t0} must be > 0")
    e = spectrum.energies
    beta0 = 1.0 / t0
    b = np.exp(-0.5 * beta0 * (e[:, None] + e[None, :])) * x.x
    a = ((e[:, None] - e[None, :]) * b).sum(axis=1) / t0**2
    return PerturbationObjects(b=b, a=a, t0=t0)

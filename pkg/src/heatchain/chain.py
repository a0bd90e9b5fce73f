"""Block-tridiagonal GOE chain Hamiltonians and their spectra.

A quasi one-dimensional chaotic system of length ``L`` is modeled as ``k``
GOE blocks of dimension ``n`` coupled along the chain, so ``L`` is
proxied by the block count.  Entry statistics (all real Gaussians, zero
mean):

==================  =========================================
bulk block, i != j  variance ``lam**2 / n``
bulk block, i == j  variance ``2 * lam**2 / n``
inter-block W       variance ``w**2 / n``, independent entries
surface couplings   variance ``v**2``, confined to the home block
==================  =========================================

Each end block carries ``n_surf`` distinguished surface basis states with
diagonal energy ``e1``; the heat baths attach to those states only.  The
inter-block coupling matrices are sampled once and mirrored by transpose,
so every Hamiltonian is exactly symmetric.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CouplingRegimeWarning, NumericalError, ParameterError
from .seeding import substream


@dataclass(frozen=True)
class ChainParams:
    """Geometry, ensemble scales, and seed of one chain model.

    k: block count (length proxy), n: block dimension, lam: intra-block
    GOE scale, w: inter-block coupling scale, v: surface-state coupling
    scale, e1: surface-state diagonal energy, n_surf: surface states per
    end, seed: master seed for reproducible sampling.
    """

    k: int
    n: int
    lam: float
    w: float
    v: float
    e1: float = 0.0
    n_surf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"block count k={self.k} must be >= 1")
        if self.n < 2:
            raise ParameterError(f"block dimension n={self.n} must be >= 2")
        if not self.lam > 0:
            raise ParameterError(f"GOE scale lam={self.lam} must be > 0")
        if self.w < 0 or self.v < 0:
            raise ParameterError("coupling scales w, v must be >= 0")
        if not 1 <= self.n_surf < self.n:
            raise ParameterError(f"n_surf={self.n_surf} must satisfy 1 <= n_surf < n")
        if self.k == 1 and 2 * self.n_surf > self.n:
            raise ParameterError("k=1 requires 2*n_surf <= n (both ends share one block)")
        if self.w > self.lam:
            warnings.warn(
                f"w={self.w} > lam={self.lam}: outside the physically sensible "
                "coupling regime (w <= lam)",
                CouplingRegimeWarning,
                stacklevel=2,
            )

    @property
    def dim(self) -> int:
        return self.k * self.n

    @property
    def lam_eff(self) -> float:
        """Bulk effective GOE scale sqrt(lam^2 + 2 w^2)."""
        return math.sqrt(self.lam**2 + 2.0 * self.w**2)


@dataclass(frozen=True)
class ChainHamiltonian:
    """Dense symmetric chain Hamiltonian with its sampling parameters.

    ``params`` may be None for hand-built matrices used in tests.
    """

    matrix: np.ndarray
    params: ChainParams | None


@dataclass(frozen=True)
class SystemSpectrum:
    """Full eigen-decomposition of a chain Hamiltonian.

    energies: ascending eigenvalues; modes: orthonormal eigenvectors as
    columns, in the site basis.  Immutable and safe to share read-only.
    """

    energies: np.ndarray
    modes: np.ndarray
    params: ChainParams | None


def surface_indices(params: ChainParams, end: str) -> np.ndarray:
    """Global site indices of the surface states at one chain end.

    Left surface states are the first ``n_surf`` states of block 1, right
    surface states the last ``n_surf`` states of block k.
    """
    if end == "left":
        return np.arange(params.n_surf)
    if end == "right":
        return np.arange(params.dim - params.n_surf, params.dim)
    raise ParameterError(f"end must be 'left' or 'right', got {end!r}")


def _carve_surface(h: np.ndarray, params: ChainParams, end: str, rng: np.random.Generator):
    """Replace one end block's surface rows/columns in place.

    Surface states get diagonal energy e1 and Gaussian couplings of
    variance v^2 into the non-surface states of their home block only;
    their inter-block rows are zeroed, so they never reach the neighboring
    block.
    """
    idx = surface_indices(params, end)
    block = 0 if end == "left" else params.k - 1
    home = np.arange(block * params.n, (block + 1) * params.n)
    special = set(surface_indices(params, "left")) | set(surface_indices(params, "right"))
    bulk = np.array([i for i in home if i not in special])

    h[idx, :] = 0.0
    h[:, idx] = 0.0
    for s in idx:
        h[s, s] = params.e1
        row = rng.standard_normal(bulk.size) * params.v
        h[s, bulk] = row
        h[bulk, s] = row


def sample_chain_hamiltonian(params: ChainParams, rng: np.random.Generator | None = None) -> ChainHamiltonian:
    """Draw one chain Hamiltonian with the ensemble statistics above.

    With ``rng=None`` the stream is derived from ``params.seed``, so equal
    (params, seed) give bit-identical matrices.  Blocks are sampled in
    chain order, then the inter-block couplings, then the two surfaces.
    """
    if rng is None:
        rng = substream(params.seed)
    n, k = params.n, params.k
    h = np.zeros((params.dim, params.dim))

    goe_scale = params.lam / math.sqrt(2.0 * n)
    for b in range(k):
        sl = slice(b * n, (b + 1) * n)
        a = rng.standard_normal((n, n))
        h[sl, sl] = (a + a.T) * goe_scale

    w_scale = params.w / math.sqrt(n)
    for b in range(k - 1):
        top = slice(b * n, (b + 1) * n)
        bot = slice((b + 1) * n, (b + 2) * n)
        wblk = rng.standard_normal((n, n)) * w_scale
        h[top, bot] = wblk
        h[bot, top] = wblk.T

    _carve_surface(h, params, "left", rng)
    _carve_surface(h, params, "right", rng)
    return ChainHamiltonian(matrix=h, params=params)


def diagonalize_chain(h: ChainHamiltonian) -> SystemSpectrum:
    """Dense symmetric eigensolve feeding all downstream modules.

    Verifies orthonormality of the eigenvectors (1e-10) and the
    reconstruction residual ``|H - U diag(E) U^T|_max <= 1e-9 |H|_max``.
    """
    m = np.asarray(h.matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError("matrix contains non-finite entries")

    energies, modes = np.linalg.eigh(m)

    dim = m.shape[0]
    orth = np.abs(modes.T @ modes - np.eye(dim)).max()
    recon = np.abs(m - (modes * energies) @ modes.T).max()
    scale = np.abs(m).max()
    if orth > 1e-10 or recon > 1e-9 * max(scale, 1e-300):
        raise NumericalError(
            f"eigensolve accuracy contract violated: dim={dim}, "
            f"orthogonality residual={orth:.3e}, reconstruction residual={recon:.3e}, "
            f"|H|_max={scale:.3e}"
        )
    return SystemSpectrum(energies=energies, modes=modes, params=h.params)


def smoothed_level_density(spec: SystemSpectrum, grid: np.ndarray, eta: float) -> np.ndarray:
    """Lorentzian-smoothed level density (1/pi) sum_m eta/((E-E_m)^2 + eta^2).

    Integrates to the total state count k*n over a wide grid.
    """
    if not eta > 0:
        raise ParameterError(f"smoothing width eta={eta} must be > 0")
    grid = np.asarray(grid, dtype=float)
    de = grid[:, None] - spec.energies[None, :]
    return (eta / np.pi) * (1.0 / (de**2 + eta**2)).sum(axis=1)


def center_level_spacing(params: ChainParams) -> float:
    """Mean level spacing at band center, pi*lam_eff/(k*n), semicircle estimate."""
    return math.pi * params.lam_eff / params.dim


def spectral_range_estimate(h: ChainHamiltonian) -> float:
    """Spectral range estimate sqrt(Tr(H^2)/(k*n))."""
    m = np.asarray(h.matrix)
    return float(np.sqrt((m * m).sum() / m.shape[0]))

"""Shared fixtures-in-code for the test suite."""

import numpy as np

from heatchain.baths import BathSpec, build_surface_operator, coupling_kernel
from heatchain.chain import ChainParams, diagonalize_chain, sample_chain_hamiltonian, spectral_range_estimate
from heatchain.baths import default_bandwidth


def synthetic_spectrum(energies, modes=None):
    """SystemSpectrum with given energies; identity modes unless provided."""
    from heatchain.chain import SystemSpectrum

    energies = np.asarray(energies, dtype=float)
    if modes is None:
        modes = np.eye(energies.size)
    return SystemSpectrum(energies=energies, modes=np.asarray(modes, dtype=float), params=None)


def offdiag_kernel(x12, temperature=1.0, delta=50.0):
    """Two-level CouplingKernel with a single off-diagonal element."""
    from heatchain.baths import CouplingKernel

    x = np.array([[0.0, x12], [x12, 0.0]])
    return CouplingKernel(x=x, spec=BathSpec(temperature=temperature, delta=delta))


def dense_kernel(rng, dim, scale=1.0, temperature=1.0):
    """Strictly positive symmetric kernel (irreducible by construction)."""
    from heatchain.baths import CouplingKernel

    a = rng.random((dim, dim))
    x = scale * (0.05 + 0.5 * (a + a.T))
    return CouplingKernel(x=x, spec=BathSpec(temperature=temperature, delta=50.0))


def bath_system(layout="same", a_ratio=1.0, k=2, n=20, seed=3, q_kind="projector",
                v=0.25, w=0.5, lam=1.0):
    """Sampled chain plus a pair of coupling kernels.

    layout 'same' attaches both baths to the left surface (equal couplings
    when a_ratio == 1, exactly similar otherwise); 'opposite' attaches
    bath 2 to the right surface (dissimilar couplings).
    """
    params = ChainParams(k=k, n=n, lam=lam, w=w, v=v, seed=seed)
    h = sample_chain_hamiltonian(params)
    spectrum = diagonalize_chain(h)
    bw = default_bandwidth(spectral_range_estimate(h))
    end2 = "left" if layout == "same" else "right"
    spec1 = BathSpec(temperature=1.0, a0=a_ratio / (2 * np.pi), delta=bw, end="left",
                     q_kind=q_kind, q_seed=5)
    spec2 = BathSpec(temperature=1.0, a0=1.0 / (2 * np.pi), delta=bw, end=end2,
                     q_kind=q_kind, q_seed=6)
    x1 = coupling_kernel(build_surface_operator(spec1, params), spec1, spectrum)
    x2 = coupling_kernel(build_surface_operator(spec2, params), spec2, spectrum)
    return params, spectrum, x1, x2

import numpy as np
import pytest

from heatchain.chain import ChainParams, diagonalize_chain, sample_chain_hamiltonian
from heatchain.seeding import substream

SPECTRAL_SEED = 17
SPECTRAL_N = 200
SPECTRAL_W = 0.25
SPECTRAL_V2N = 0.5
SPECTRAL_REALIZATIONS = 40


@pytest.fixture(scope="session")
def spectral_ensembles():
    """Diagonalized ensembles for the spectral acceptance criteria.

    K in {2, 4, 8}, N=200, 40 realizations each; shared across tests so
    the expensive eigensolves run once per session.
    """
    out = {}
    for ki, k in enumerate((2, 4, 8)):
        params = ChainParams(
            k=k, n=SPECTRAL_N, lam=1.0, w=SPECTRAL_W,
            v=np.sqrt(SPECTRAL_V2N / SPECTRAL_N), seed=SPECTRAL_SEED,
        )
        spectra = [
            diagonalize_chain(sample_chain_hamiltonian(params, substream(SPECTRAL_SEED, ki, r)))
            for r in range(SPECTRAL_REALIZATIONS)
        ]
        out[k] = (params, spectra)
    return out

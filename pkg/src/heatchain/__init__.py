"""Heat conductance of chaotic quasi one-dimensional quantum chains.

Block-GOE chain models coupled to two heat baths: exact and perturbative
steady states of the two-bath master equation, linear-response heat
conductance, and the self-consistent spectral analysis behind its 1/length
scaling.
"""

__version__ = "0.1.0"

from .baths import (  # noqa: F401
    A0_DEFAULT,
    BathSpec,
    CouplingKernel,
    PerturbationObjects,
    RateMatrix,
    build_surface_operator,
    coupling_kernel,
    default_bandwidth,
    perturbation_objects,
    rate_matrix,
)
from .chain import (  # noqa: F401
    ChainHamiltonian,
    ChainParams,
    SystemSpectrum,
    center_level_spacing,
    diagonalize_chain,
    sample_chain_hamiltonian,
    smoothed_level_density,
    spectral_range_estimate,
    surface_indices,
)
from .greens import (  # noqa: F401
    GreenProfile,
    StrengthFunction,
    average_level_density,
    bulk_green,
    pastur_solve,
    predicted_surface_halfwidth,
    strength_function_analytic,
    strength_function_empirical,
    suggested_eta,
)
from .steady import (  # noqa: F401
    CouplingClass,
    ReferenceTemperatures,
    SteadyState,
    classify_couplings,
    gibbs_state,
    linearized_solve,
    occupation_probabilities,
    reference_temperature,
    stationary_exact,
    stationary_perturbative,
)
from .transport import (  # noqa: F401
    TransportResult,
    conductance_green_kubo,
    conductance_linear_response,
    fourier_linearity_fit,
    heat_current_exact,
)

"""Simulation and certification of high-dimensional OAM entanglement between two memories."""

__version__ = "0.1.0"

from .errors import OamSimError
from .fitting import FitResult, fit_lorentzian, hwhm_width
from .measurement_sim import (
    CoincidenceTable,
    Setting,
    Visibilities,
    born_probability,
    sample_counts,
    simulate_coincidence_matrix,
    simulate_mub_counts,
    visibilities_from_counts,
)
from .oam_optics import (
    FieldGrid,
    equal_amplitude_radius,
    lg_amplitude,
    mub_basis,
    qutrit_tomo_states,
    superposition_phase_mask,
)
from .quantum_state import (
    density_from_pure,
    kron_product,
    matrix_sqrt_psd,
    project_to_physical,
    uhlmann_fidelity,
)
from .source_model import (
    ExperimentConfig,
    LorentzianParams,
    NoiseParams,
    SpiralSpectrum,
    StorageProfile,
    apply_noise,
    apply_storage,
    build_spiral_spectrum,
    joint_state,
    lorentzian_eval,
)
from .tomography import (
    TomoDataset,
    forward_probabilities,
    ideal_state,
    linear_inversion,
    mle_reconstruct,
    monte_carlo,
    simulate_tomo_counts,
)
from .witness import (
    bound_M,
    bound_W,
    certify_dimension,
    compute_M,
    compute_W,
    schmidt_threshold_check,
    witness_report,
)

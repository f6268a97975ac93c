"""Simulator and analysis toolkit for multi-photon GHZ entanglement on a
silicon photonic chip: noisy state generation with post-selection, seeded
Monte Carlo counting statistics, quantum state tomography, and nonlocality
certification (all-versus-nothing test, Mermin inequalities, entanglement
witness)."""

from .circuit import (
    NoiseParams,
    PairEmissionEvent,
    bell_state,
    fidelity_from_visibility,
    ghz3_state,
    ghz4_state,
    ghz_vector,
    hhom_fringe,
    hhom_visibility,
    path_correlation_fringe,
    post_selection_probability,
    pps_route,
)
from .nonlocality import (
    AVN_SPECS_3,
    AVN_SPECS_4,
    AvnResult,
    AvnSettingSpec,
    CalibrationResult,
    MerminResult,
    avn_epsilon,
    avn_suite,
    calibrate,
    mermin_m3,
    mermin_m4,
    witness_ghz4,
)
from .qmath import (
    expectation,
    fidelity_with_pure,
    kron,
    partial_trace,
    pauli_matrix,
    project_qubit,
)
from .sampler import (
    CountRecord,
    SamplerConfig,
    exact_record,
    outcome_probabilities,
    rate_report,
    sample_experiment,
    sample_record,
)
from .tomography import (
    TomographySet,
    UncertainValue,
    enumerate_settings,
    fidelity_with_uncertainty,
    linear_inversion,
    pauli_expectation_from_counts,
    physical_projection,
    reconstruct,
)

__version__ = "0.1.0"

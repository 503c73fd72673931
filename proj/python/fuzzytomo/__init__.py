"""Python bindings for the fuzzytomo tomography library."""

from ._core import (
    CampaignResult,
    Comparison,
    ExperimentConfig,
    OperatorModel,
    Protocol,
    Symmetry,
    basis_unitary,
    birefringence,
    compare_models,
    fidelity,
    haar_random_state,
    idler_wavelength,
    information_matrix,
    mle_reconstruct,
    optical_thickness,
    plate_thickness,
    presets,
    protocol_for,
    refractive_indices,
    run_campaign,
    sample_counts,
    universal_coefficients,
    waveplate_unitary,
)

__all__ = [name for name in dir() if not name.startswith("_")]

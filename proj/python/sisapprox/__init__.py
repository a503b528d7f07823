"""Nearest shift-invariant subspaces from sampled Fourier data."""

from ._sisapprox import (
    AllocationResult,
    DiscreteDataset,
    DiscreteModel,
    DiscretePartition,
    DualLattice,
    EigenSystem,
    ExtraInvariantModel,
    FittedModel,
    InputError,
    MultiTileModel,
    NumericalError,
    SpectralDataset,
    SpectralGrid,
    brute_force_optimal,
    eig_hermitian,
    energy_report,
    error_discrete,
    error_extra,
    error_sis,
    fit_discrete,
    fit_extra_invariant,
    fit_multitile,
    fit_sis,
    gramian,
    ingest,
    project_residuals,
    run_cli,
    synthesize,
    verify_extra_invariance,
    verify_multitile,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]

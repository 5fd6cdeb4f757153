"""Dissipative qubit simulators, dataset generation and bath-parameter regressors."""

from ._core import (
    Dataset,
    DomainError,
    Error,
    Model,
    QuadratureError,
    ShapeError,
    SimulationError,
    TaskMismatchError,
    UsageError,
    __version__,
    cli,
    decoherence_gamma,
    dephasing_coherence,
    evaluate,
    fit,
    generate,
    lorentz_drude_correlation,
    lorentz_drude_sd,
    matsubara_terms,
    ohmic_correlation,
    ohmic_sd,
    read_dataset,
    spin_boson,
    trace_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

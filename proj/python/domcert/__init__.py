"""Dominance certificates for discrete-time switching systems."""

from ._core import (
    AdmissibilityError,
    DegenerateStart,
    Error,
    GapError,
    InvalidInput,
    NoSolution,
    ParseError,
    StaleCertificate,
    StructureError,
    System,
    analyze,
    cycle_spectra,
    decay,
    inertia,
    lmi_residual,
    load_system,
    parse_system,
    path_complete,
    projective_distance,
    propose_rates,
    rates_ok,
    run_cli,
    simulate,
    stein_solve,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

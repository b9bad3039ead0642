"""Entanglement-free remote implementation of block-permutation unitaries."""

from .core import (
    EnumerateAll,
    Forced,
    GateMatrix,
    MeasurementOutcome,
    Sample,
    StateVector,
    apply_gate,
    basis_state,
    equal_states,
    generalized_cnot,
    measure,
    qft,
    s_gate,
)
from .errors import (
    ConfigError,
    DomainError,
    ImpossibleOutcomeError,
    LocalityError,
    RemoteOpError,
    UnsupportedError,
)
from .protocol import (
    Case,
    ResourceVector,
    Transcript,
    run_bqst,
    run_remote_restricted,
    run_simple_swap,
    run_yang_cu,
    teleport,
)
from .restricted import (
    Permutation,
    RestrictedOperation,
    build_matrix,
    classify,
    controlled_u,
    random_restricted,
    u_anti,
    u_diag,
)

__version__ = "0.1.0"

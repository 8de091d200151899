"""Invariant-based shortcut to a two-qubit Bell state, with an adiabatic baseline and work statistics."""

from .adiabatic import AdiabaticSpec, check_local_adiabatic, h_adiabatic, s_qab, t_adiabatic
from .errors import (
    ContractViolationError,
    DiagnosticError,
    ProtocolInfeasibleError,
    RejectedInputError,
    ShortcutError,
    SingularGapError,
    SingularParameterError,
)
from .experiments import (
    ScenarioConfig,
    find_tau_f,
    load_config,
    run_adiabatic,
    run_full_sweep,
    run_nonadiabatic,
    windowed_work,
)
from .invariant import InvariantParams, f_modulation, g_coefficients, h_invariant, invariant_operator, invariant_residual
from .propagator import Schedule, Trajectory, propagate
from .quantum_core import herm_eigensystem, pauli_product, trace_distance
from .work import average_power, average_work, tpm_distribution

__version__ = "0.1.0"

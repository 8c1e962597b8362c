"""Phonon blockade in a driven nanomechanical resonator coupled to a charge qubit."""
from .analytic import (blockade_condition, four_state_oracle, g2_analytic,
                       steady_amplitudes)
from .dynamics import PeriodicPropagator, backend_name, mesolve, schrodinger_evolve
from .model import (SystemParams, collapse_operators, derive, effective_hamiltonian,
                    lab_hamiltonian, reference_params)
from .observables import g2_tau, g2_zero, truncation_fidelity
from .steadystate import steadystate, steadystate_direct, steadystate_timeavg
from .superop import build_liouvillian

__version__ = "0.1.0"

__all__ = [
    "PeriodicPropagator", "SystemParams", "backend_name", "blockade_condition",
    "build_liouvillian", "collapse_operators", "derive", "effective_hamiltonian",
    "four_state_oracle", "g2_analytic", "g2_tau", "g2_zero", "lab_hamiltonian", "mesolve",
    "reference_params", "schrodinger_evolve", "steady_amplitudes", "steadystate",
    "steadystate_direct", "steadystate_timeavg", "truncation_fidelity",
]

"""Per-point evaluation of a parameter set under one of four pipelines.

``lab``        full driven Hamiltonian, periodic steady state, window average
``effective``  static effective Hamiltonian, Liouvillian null space
``analytic``   closed-form weak-drive amplitudes
``oracle``     exact four-state non-Hermitian solve
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..analytic import four_state_oracle, g2_analytic, steady_amplitudes
from ..dynamics import PeriodicPropagator, mesolve, periodic_evolve, schrodinger_evolve
from ..model import (SystemParams, collapse_operators, derive, effective_hamiltonian,
                     lab_hamiltonian, operators)
from ..observables import (detection_quantities, fit_rabi_frequency, g2_tau, g2_zero,
                           mean_phonon_number, phonon_distribution, truncation_fidelity)
from ..operators import HarmonicOperator, Operator, basis_state, fock_projector, tensor
from ..steadystate import spectral_gap, steadystate_direct, steadystate_timeavg
from ..superop import build_liouvillian, liouvillian_generator

PIPELINES = ("lab", "effective", "analytic", "oracle")

STATE_OBSERVABLES = ("n_mean", "g2_0", "F", "P_e", "P_2", "R", "P_0", "P_1", "P_3",
                     "n_ptp", "spectral_gap")
AMPLITUDE_OBSERVABLES = ("n_mean", "g2_0", "P_e", "P_2", "R", "P_0", "P_1")

SUPPORTED = {
    "lab": set(STATE_OBSERVABLES) - {"spectral_gap"},
    "effective": set(STATE_OBSERVABLES) - {"n_ptp"},
    "analytic": set(AMPLITUDE_OBSERVABLES),
    "oracle": set(AMPLITUDE_OBSERVABLES),
}


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    transient: float | None = None   # seconds; None means 20 / smallest rate
    window_periods: int = 10
    samples: int = 200
    n_phase: int = 40
    n_t0: int = 8

    def as_dict(self) -> dict:
        return dict(rtol=self.rtol, atol=self.atol, transient=self.transient,
                    window_periods=self.window_periods, samples=self.samples,
                    n_phase=self.n_phase, n_t0=self.n_t0)


def _from_state(rho, wanted, extra=None) -> dict:
    out = dict(extra or {})
    p = phonon_distribution(rho)
    det = detection_quantities(rho)
    values = {
        "n_mean": lambda: mean_phonon_number(rho),
        "g2_0": lambda: g2_zero(rho),
        "F": lambda: truncation_fidelity(rho),
        "P_e": lambda: det["P_e"],
        "P_2": lambda: det["P_2"],
        "R": lambda: det["R"],
        "P_0": lambda: float(p[0]),
        "P_1": lambda: float(p[1]),
        "P_3": lambda: float(p[3]) if p.size > 3 else 0.0,
    }
    for k in wanted:
        if k not in out:
            out[k] = values[k]()
    return out


def lab_propagator(params: SystemParams, solver: SolverSettings) -> PeriodicPropagator:
    H = lab_hamiltonian(params, frame="drive")
    gen = liouvillian_generator(H, collapse_operators(params))
    return PeriodicPropagator(gen, params.omega_f, n_phase=solver.n_phase,
                              rtol=solver.rtol, atol=solver.atol)


def lab_steady(params: SystemParams, solver: SolverSettings, prop=None):
    """Window-averaged driven steady state; returns ``(TimeAverage, propagator)``."""
    prop = prop or lab_propagator(params, solver)
    o = operators(params.fock_dim)
    ta = steadystate_timeavg(
        lab_hamiltonian(params, frame="drive"), collapse_operators(params), {"n": o.n},
        transient=solver.transient, window=solver.window_periods, samples=solver.samples,
        omega=params.omega_f, propagator=prop, rtol=solver.rtol, atol=solver.atol)
    return ta, prop


def evaluate_point(params: SystemParams, pipeline: str, observables, solver: SolverSettings) -> dict:
    """Steady-state observables of one parameter set."""
    if pipeline == "lab":
        ta, _ = lab_steady(params, solver)
        return _from_state(ta.rho, observables, {"n_ptp": ta.peak_to_peak["n"]})
    if pipeline == "effective":
        L = build_liouvillian(effective_hamiltonian(params), collapse_operators(params))
        rho = steadystate_direct(L)
        extra = {}
        if "spectral_gap" in observables:
            extra["spectral_gap"] = spectral_gap(L)
        return _from_state(rho, observables, extra)
    if pipeline in ("analytic", "oracle"):
        lam = derive(params).lambda_eff
        args = (params.epsilon, params.kappa, params.gamma, lam)
        if pipeline == "analytic":
            amps = steady_amplitudes(*args)
            g2 = g2_analytic(*args)
        else:
            res = four_state_oracle(*args)
            amps, g2 = res.amplitudes, res.g2
        pop = amps.populations
        norm = sum(pop.values())
        p1, p2, pe = pop["c1g"] / norm, pop["c2g"] / norm, pop["c0e"] / norm
        values = {"n_mean": p1 + 2 * p2, "g2_0": g2, "P_e": pe, "P_2": p2,
                  "R": pe / p2 if p2 > 0 else float("nan"), "P_0": 1 - p1 - p2, "P_1": p1}
        return {k: values[k] for k in observables}
    raise ValueError(f"unknown pipeline {pipeline!r}")


def correlation_curve(params: SystemParams, pipeline: str, kappa_taus, solver: SolverSettings):
    """``g2(tau)`` on a grid of ``kappa * tau``; returns ``(taus, values, g2_0)``."""
    taus = np.asarray(kappa_taus, dtype=float) / params.kappa
    if pipeline == "lab":
        ta, prop = lab_steady(params, solver)
        k = ta.meta["transient_periods"]
        n = 2 * params.fock_dim
        rho0 = np.zeros(n * n, dtype=complex)
        rho0[0] = 1.0
        start = prop.power(k + 2 * solver.window_periods) @ rho0
        cc = g2_tau(prop, start, taus, n_t0=solver.n_t0, mean_n=ta.means["n"])
    elif pipeline == "effective":
        L = build_liouvillian(effective_hamiltonian(params), collapse_operators(params))
        cc = g2_tau(L, steadystate_direct(L), taus, rtol=solver.rtol, atol=solver.atol)
    else:
        raise ValueError(f"pipeline {pipeline!r} cannot produce g2(tau)")
    return cc.taus, cc.values, cc.reference


def rabi_trace(params: SystemParams, pipeline: str, times, solver: SolverSettings):
    """``P_{0e}(t)`` and ``P_{2g}(t)`` from ``|e,0>`` without dissipation."""
    M = params.fock_dim
    if pipeline == "lab":
        H = lab_hamiltonian(params, frame="lab")
    elif pipeline == "effective":
        H = HarmonicOperator(effective_hamiltonian(params))
    else:
        raise ValueError(f"pipeline {pipeline!r} cannot produce a Rabi trace")
    proj = {
        "P_0e": tensor(_qubit_proj(1), fock_projector(0, M, qubit=False)),
        "P_2g": tensor(_qubit_proj(0), fock_projector(2, M, qubit=False)),
    }
    traj = schrodinger_evolve(H, basis_state((2, M), (1, 0)), times, proj,
                              rtol=solver.rtol, atol=solver.atol)
    rabi = 0.5 * fit_rabi_frequency(traj.times, traj["P_0e"])
    return traj, rabi


def _qubit_proj(index):
    m = np.zeros((2, 2))
    m[index, index] = 1.0
    return Operator(m, (2,))


def transient_trace(params: SystemParams, pipeline: str, times, solver: SolverSettings, n_max=3):
    """``P_n(t)`` and ``<n>(t)`` from ``|g,0>``."""
    o = operators(params.fock_dim)
    obs = {"n_mean": o.n}
    for k in range(n_max + 1):
        obs[f"P_{k}"] = fock_projector(k, params.fock_dim)
    n = 2 * params.fock_dim
    rho0 = np.zeros((n, n), dtype=complex)
    rho0[0, 0] = 1.0
    if pipeline == "lab":
        prop = lab_propagator(params, solver)
        return periodic_evolve(prop, rho0, times, obs)
    if pipeline == "effective":
        return mesolve(effective_hamiltonian(params), rho0, collapse_operators(params), times,
                       obs, rtol=solver.rtol, atol=solver.atol)
    raise ValueError(f"pipeline {pipeline!r} cannot produce a transient")

"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (also collected into the pytest terminal
summary).  Run standalone with ``python3 tests/test_acceptance.py``.
Lab-frame criteria take minutes and carry the ``slow`` marker.
"""
from __future__ import annotations

import math
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phonon_blockade.analytic import four_state_oracle, g2_analytic, steady_amplitudes
from phonon_blockade.dynamics import mesolve
from phonon_blockade.experiments import pipelines as pl
from phonon_blockade.experiments.scenarios import get_scenario, run
from phonon_blockade.model import (SystemParams, collapse_operators, derive,
                                   effective_hamiltonian, reference_params)
from phonon_blockade.observables import g2_tau, g2_zero, mean_phonon_number
from phonon_blockade.operators import DensityMatrix, Operator, coherent_dm, create, destroy, num
from phonon_blockade.steadystate import steadystate_direct
from phonon_blockade.superop import build_liouvillian

MHZ = 2 * math.pi * 1e6
SOLVER = pl.SolverSettings()
REF_HZ = dict(get_scenario("fig4").base)


def _report(number, checks, started):
    """Format one line per criterion and fail the test if any check failed."""
    ok = all(c[1] for c in checks)
    parts = "; ".join(f"{label}: {detail} [{'ok' if good else 'FAIL'}]"
                      for label, good, detail in checks)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - started:.0f} s) {parts}"
    print(line)
    try:
        from conftest import ACCEPTANCE_LINES
        ACCEPTANCE_LINES.append(line)
    except ImportError:  # pragma: no cover
        pass
    return ok, line


@lru_cache(maxsize=None)
def _lab(**over):
    """Windowed lab-frame steady state at the reference point plus overrides (Hz)."""
    return pl.evaluate_point(reference_params(**{**REF_HZ, **over}), "lab",
                             ("n_mean", "g2_0", "F"), SOLVER)


def _rel(a, b):
    return abs(a - b) / abs(b)


# -- 1 ------------------------------------------------------------------------

def criterion_1():
    w0 = 2 * math.pi * 1e9
    p = SystemParams(omega0=w0, g=0.1 * w0, omega_p_drive=0.1 * w0, delta=2 * w0)
    lam_rel = _rel(derive(p).lambda_eff, w0 / 500)
    scn = get_scenario("fig2d")
    res = run(scn)
    lam = derive(scn.params_at({})).lambda_eff
    rabi = res.meta["all"]["rabi_frequency_rad_s"]
    ratio = rabi / (math.sqrt(2) * lam)
    return [
        ("lambda = omega0/500", lam_rel < 1e-12, f"rel err {lam_rel:.1e}"),
        ("lab Rabi / sqrt2 lambda", res.ok and abs(ratio - 1) <= 0.10, f"{ratio:.4f}"),
    ]


# -- 2 ------------------------------------------------------------------------

def criterion_2():
    v = _lab()
    return [
        ("<n>", abs(v["n_mean"] - 0.44) <= 0.05, f"{v['n_mean']:.4f} (0.44 +- 0.05)"),
        ("g2(0)", abs(v["g2_0"] - 0.06) <= 0.03, f"{v['g2_0']:.4f} (0.06 +- 0.03)"),
    ]


# -- 3 ------------------------------------------------------------------------

DETUNING_GRID = tuple(np.round(np.arange(-2.0, 2.0001, 0.1), 10) * 1e6)


def criterion_3():
    g2 = np.array([_lab(delta_d=float(d))["g2_0"] for d in DETUNING_GRID])
    x = np.array(DETUNING_GRID) / 1e6
    lam_hz = derive(reference_params(**REF_HZ)).lambda_eff / MHZ
    target = math.sqrt(2) * lam_hz / 2
    i0 = int(np.argmin(g2))
    checks = [("global minimum at 0", x[i0] == 0.0, f"argmin {x[i0]:+.1f} MHz, g2 {g2[i0]:.4f}")]
    for side, mask in (("-", x < 0), ("+", x > 0)):
        idx = np.flatnonzero(mask)
        interior = [i for i in idx if 0 < i < len(x) - 1 and g2[i] > g2[i - 1]
                    and g2[i] > g2[i + 1] and g2[i] > 1]
        if not interior:
            checks.append((f"peak {side}", False, "no local maximum above 1"))
            continue
        k = max(interior, key=lambda i: g2[i])
        pos_ok = abs(abs(x[k]) - target) <= 0.3 * target
        mag_ok = 2 <= g2[k] <= 10
        checks.append((f"peak {side}", pos_ok and mag_ok,
                       f"{x[k]:+.1f} MHz (target {target:.3f} +- 30%), g2 {g2[k]:.2f} (2-10)"))
    return checks


# -- 4 ------------------------------------------------------------------------

def criterion_4():
    p = reference_params(**REF_HZ)
    lam = derive(p).lambda_eff
    args = (p.epsilon, p.kappa, p.gamma, lam)
    g2a = g2_analytic(*args)
    checks = [("g2_analytic", abs(g2a - 7.45e-3) <= 1e-4, f"{g2a:.4e} (7.45e-3 +- 1e-4)")]

    weak = (p.epsilon / 10,) + args[1:]
    orc = four_state_oracle(*weak)
    ana = steady_amplitudes(*weak)
    devs = {
        "g2": _rel(orc.g2, g2_analytic(*weak)),
        "|c1g|^2": _rel(orc.amplitudes.populations["c1g"], ana.populations["c1g"]),
        "|c2g|^2": _rel(orc.amplitudes.populations["c2g"], ana.populations["c2g"]),
    }
    worst = max(devs, key=devs.get)
    checks.append(("oracle vs closed form at eps/10", devs[worst] <= 0.01,
                   ", ".join(f"{k} {v:.2%}" for k, v in devs.items()) + " (<= 1%)"))

    L = build_liouvillian(effective_hamiltonian(p), collapse_operators(p))
    g2e = g2_zero(steadystate_direct(L))
    g2o = four_state_oracle(*args).g2
    checks.append(("effective vs oracle", _rel(g2e, g2o) <= 0.30,
                   f"{g2e:.4e} vs {g2o:.4e}, rel {_rel(g2e, g2o):.0%} (<= 30%)"))
    return checks


# -- 5 ------------------------------------------------------------------------

GAMMA_GRID = (0.5e6, 1e6, 2e6, 3e6, 4e6, 5e6, 6e6)


def criterion_5():
    g2 = [_lab(omega_p=200e6, gamma=g)["g2_0"] for g in GAMMA_GRID]
    end = g2[-1]
    low_q = _lab(n_th=2.0)["g2_0"]
    high_q = _lab(n_th=2.0, Q=5e4)["g2_0"]
    return [
        ("max g2 for Gamma <= 6 MHz", max(g2) <= 0.15, f"{max(g2):.4f} (<= 0.15)"),
        ("endpoint Gamma = 6 MHz", abs(end - 0.07) <= 0.08, f"{end:.4f} (0.07 +- 0.08)"),
        ("n_th = 2, Q = 5e3", abs(low_q - 2) <= 0.5, f"{low_q:.3f} (2 +- 0.5)"),
        ("Q = 5e4 below Q = 5e3", high_q < low_q, f"{high_q:.3f} < {low_q:.3f}"),
    ]


# -- 6 ------------------------------------------------------------------------

def criterion_6():
    over = dict(gamma_phi=2 * REF_HZ["gamma"])
    g2 = _lab(**over)["g2_0"]
    # the neighbourhood of tau = 0; the lab curve later dips below g2(0) near
    # kappa tau ~ 0.1 before rising towards 1, so a coarse grid would miss it
    kt = (0.0, 0.005, 0.01, 0.02)
    _, vals, _ = pl.correlation_curve(reference_params(**{**REF_HZ, **over}), "lab", kt, SOLVER)
    return [
        ("g2(0) at Gamma_phi = 2 Gamma", abs(g2 - 0.5) <= 0.15, f"{g2:.4f} (0.5 +- 0.15)"),
        ("strict local minimum at tau = 0", bool(np.all(vals[1:] > vals[0])),
         "g2 at kappa tau 0, 0.005, 0.01, 0.02: " + ", ".join(f"{v:.4f}" for v in vals)),
    ]


# -- 7 ------------------------------------------------------------------------

EPS_LOW = (0.1e6, 0.2e6, 0.3e6, 0.4e6, 0.5e6)
EPS_HIGH = (0.5e6, 0.7e6, 1.0e6, 1.5e6)
OMEGA_P = (25e6, 50e6, 75e6, 100e6, 150e6, 200e6, 300e6)


def criterion_7():
    f_low = {e: _lab(epsilon=e)["F"] for e in EPS_LOW}
    f_high = [_lab(epsilon=e)["F"] for e in EPS_HIGH]
    f_op = [_lab(omega_p=o)["F"] for o in OMEGA_P]
    worst = min(f_low, key=f_low.get)
    k = int(np.argmax(f_op))
    interior = 0 < k < len(OMEGA_P) - 1
    near = 50e6 <= OMEGA_P[k] <= 150e6
    return [
        ("F > 0.99 for eps <= 0.5 MHz", all(v > 0.99 for v in f_low.values()),
         f"min F {f_low[worst]:.5f} at {worst / 1e6:.1f} MHz"),
        ("F decreasing beyond 0.5 MHz", bool(np.all(np.diff(f_high) < 0)),
         ", ".join(f"{v:.4f}" for v in f_high)),
        ("F(Omega_p) non-monotone", interior, "interior maximum" if interior else "edge maximum"),
        ("maximum near 100 MHz", near, f"argmax {OMEGA_P[k] / 1e6:.0f} MHz (50-150 MHz)"),
    ]


# -- 8 ------------------------------------------------------------------------

def criterion_8():
    checks = []
    # preservation bounds on a driven, dephased, thermal effective model
    p = reference_params(epsilon=0.4e6, gamma_phi=0.5e6, n_th=0.3, fock_dim=8)
    L = build_liouvillian(effective_hamiltonian(p), collapse_operators(p))
    rng = np.random.default_rng(7)
    a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0)
    traj = mesolve(effective_hamiltonian(p), rho0, collapse_operators(p),
                   np.linspace(0, 5 / p.kappa, 6), store_states=True)
    herm = max(np.max(np.abs(r - r.conj().T)) for r in traj.states)
    mineig = min(np.linalg.eigvalsh(r).min() for r in traj.states)
    checks.append(("trace/Hermiticity/positivity",
                   traj.meta["trace_drift"] < 1e-8 and herm < 1e-10 and mineig >= -1e-8
                   and L.trace_leak() < 1e-9,
                   f"drift {traj.meta['trace_drift']:.1e}, herm {herm:.1e}, "
                   f"min eig {mineig:.1e}, leak {L.trace_leak():.1e}"))

    M, n_th = 30, 0.5
    c = [(destroy(M), n_th + 1), (create(M), n_th)]
    vac = np.zeros((M, M))
    vac[0, 0] = 1
    th = mesolve(Operator(np.zeros((M, M)), (M,)), vac, c, [0, 40.0], store_states=True)
    rho = DensityMatrix.from_numeric(th.states[-1], (M,))
    dn, dg = abs(mean_phonon_number(rho) - n_th), abs(g2_zero(rho) - 2)
    checks.append(("thermal fixed point", dn < 1e-6 and dg < 1e-6, f"|dn| {dn:.1e}, |dg2| {dg:.1e}"))

    one = np.zeros((6, 6))
    one[1, 1] = 1
    t = np.linspace(0, 5, 11)
    dec = mesolve(Operator(np.zeros((6, 6)), (6,)), one, [(destroy(6), 1.0)], t, {"n": num(6)})
    err = float(np.max(np.abs(dec["n"] / np.exp(-t) - 1)))
    checks.append(("decay exp(-kappa t)", err < 1e-6, f"rel {err:.1e}"))

    q = reference_params(**REF_HZ)
    Lq = build_liouvillian(effective_hamiltonian(q), collapse_operators(q))
    rho_ss = steadystate_direct(Lq)
    start = np.zeros((20, 20), complex)
    start[0, 0] = 1
    late = mesolve(effective_hamiltonian(q), start, collapse_operators(q), [0, 20 / q.kappa],
                   store_states=True).states[-1]
    diff = float(np.max(np.abs(late - rho_ss.data)))
    checks.append(("mesolve vs null space", diff < 1e-6, f"{diff:.1e}"))

    cc = g2_tau(Lq, rho_ss, np.array([0.0, 1.0, 15.0]) / q.kappa)
    d0 = abs(cc.values[0] - g2_zero(rho_ss))
    checks.append(("regression tau = 0", d0 < 1e-9, f"{d0:.1e}"))
    checks.append(("g2(tau -> inf) -> 1", abs(cc.values[-1] - 1) < 0.05,
                   f"{cc.values[-1]:.4f} at kappa tau = 15"))

    gc = g2_zero(coherent_dm(10, math.sqrt(0.3), qubit=None))
    checks.append(("coherent g2 = 1", abs(gc - 1) < 1e-3, f"{gc:.6f}"))
    return checks


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def evaluate(number):
    started = time.perf_counter()
    return _report(number, CRITERIA[number](), started)


def _check(number):
    ok, line = evaluate(number)
    assert ok, line


def test_criterion_1_effective_coupling():
    _check(1)


@pytest.mark.slow
def test_criterion_2_blockade_point():
    _check(2)


@pytest.mark.slow
def test_criterion_3_detuning_structure():
    _check(3)


def test_criterion_4_analytic_oracle_tower():
    _check(4)


@pytest.mark.slow
def test_criterion_5_robustness():
    _check(5)


@pytest.mark.slow
def test_criterion_6_dephasing():
    _check(6)


@pytest.mark.slow
def test_criterion_7_truncation_fidelity():
    _check(7)


def test_criterion_8_property_suite():
    _check(8)


if __name__ == "__main__":
    wanted = [int(a) for a in sys.argv[1:]] or list(CRITERIA)
    results = [evaluate(n)[0] for n in wanted]
    sys.exit(0 if all(results) else 1)

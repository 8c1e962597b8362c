import numpy as np
import pytest

from phonon_blockade import _integrate
from phonon_blockade.dynamics import (PeriodicPropagator, Trajectory, mesolve, periodic_evolve,
                                      propagate_operator, schrodinger_evolve)
from phonon_blockade.errors import DimensionError, StiffnessError
from phonon_blockade.model import (collapse_operators, effective_hamiltonian, frame_phases,
                                   lab_hamiltonian, operators, reference_params)
from phonon_blockade.observables import g2_zero, mean_phonon_number
from phonon_blockade.operators import (DensityMatrix, HarmonicOperator, Operator, basis_state,
                                       create, destroy, fock_projector, num, pauli)
from phonon_blockade.steadystate import steadystate
from phonon_blockade.superop import (build_liouvillian, liouvillian_generator,
                                    schrodinger_generator)

from conftest import random_dm

BACKENDS = ["python"] + (["compiled"] if _integrate.BACKEND == "compiled" else [])


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_level_rabi_closed_form(backend):
    omega = 2 * np.pi * 1e6
    H = Operator(0.5 * omega * pauli("x").data, (2,))
    t = np.linspace(0, 20e-6, 401)
    pe = Operator(np.diag([0.0, 1.0]), (2,))
    traj = schrodinger_evolve(H, basis_state((2,), (0,)), t, {"P_e": pe}, backend=backend)
    assert np.max(np.abs(traj["P_e"] - np.sin(omega * t / 2) ** 2)) < 1e-8
    assert traj.meta["norm_drift"] < 1e-8


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    p = reference_params(fock_dim=4)
    gen = liouvillian_generator(lab_hamiltonian(p, frame="drive"), collapse_operators(p))
    y0 = np.random.default_rng(0).standard_normal(gen.dim).astype(complex)
    t = np.linspace(0, 3e-9, 4)
    a = _integrate.integrate(gen, y0, t, backend="python")
    b = _integrate.integrate(gen, y0, t, backend="compiled")
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))


def test_fock_eigenstate_is_stationary():
    M = 5
    w0 = 2 * np.pi * 1e9
    H = Operator(w0 * num(M).data, (M,))
    t = np.linspace(0, 5e-9, 11)
    traj = schrodinger_evolve(H, basis_state((M,), (1,)), t,
                              {"P1": fock_projector(1, M, qubit=False)})
    assert np.allclose(traj["P1"], 1.0, atol=1e-12)


def test_single_mode_decay():
    M, kappa = 6, 2.0
    c = [(destroy(M), kappa)]
    rho0 = np.zeros((M, M))
    rho0[1, 1] = 1
    t = np.linspace(0, 5, 21)
    traj = mesolve(Operator(np.zeros((M, M)), (M,)), rho0, c, t, {"n": num(M)})
    assert np.max(np.abs(traj["n"] / np.exp(-kappa * t) - 1)) < 1e-6
    assert traj.meta["trace_drift"] < 1e-8


def test_thermal_fixed_point_from_any_state():
    M, kappa, n_th = 30, 1.0, 0.5
    c = [(destroy(M), kappa * (n_th + 1)), (create(M), kappa * n_th)]
    rho0 = random_dm(M, np.random.default_rng(3))
    rho0[8:, :] = 0
    rho0[:, 8:] = 0
    rho0 /= np.trace(rho0)
    traj = mesolve(Operator(np.zeros((M, M)), (M,)), rho0, c, [0, 40 / kappa],
                   store_states=True)
    rho = DensityMatrix.from_numeric(traj.states[-1], (M,))
    assert mean_phonon_number(rho) == pytest.approx(n_th, abs=1e-6)
    assert g2_zero(rho) == pytest.approx(2.0, abs=1e-6)


def test_mesolve_reaches_null_space_state():
    p = reference_params()
    H, c = effective_hamiltonian(p), collapse_operators(p)
    rho_ss = steadystate(H, c)
    n = 2 * p.fock_dim
    rho0 = np.zeros((n, n), dtype=complex)
    rho0[0, 0] = 1
    traj = mesolve(H, rho0, c, [0, 20 / p.kappa], store_states=True)
    assert np.max(np.abs(traj.states[-1] - rho_ss.data)) < 1e-6


def test_mesolve_preserves_hermiticity_and_trace():
    p = reference_params(fock_dim=5, gamma_phi=0.5e6, n_th=0.3)
    rho0 = random_dm(10, np.random.default_rng(4))
    traj = mesolve(effective_hamiltonian(p), rho0, collapse_operators(p),
                   np.linspace(0, 2e-6, 5), store_states=True)
    for rho in traj.states:
        assert np.max(np.abs(rho - rho.conj().T)) == 0
        assert abs(np.trace(rho) - 1) < 1e-8
        assert np.linalg.eigvalsh(rho).min() > -1e-8


def test_propagate_operator_stationary_and_linear():
    p = reference_params()
    H, c = effective_hamiltonian(p), collapse_operators(p)
    L = build_liouvillian(H, c)
    rho_ss = steadystate(H, c).data
    out = propagate_operator(L, rho_ss, 0.0, 3 / p.kappa)
    assert np.max(np.abs(out - rho_ss)) < 1e-8
    rng = np.random.default_rng(5)
    X = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    Y = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    a, b = 0.7 - 0.2j, -1.3
    taus = [0.5 / p.kappa, 2 / p.kappa]
    lhs = propagate_operator(L, a * X + b * Y, 0.0, taus)
    rhs = a * propagate_operator(L, X, 0.0, taus) + b * propagate_operator(L, Y, 0.0, taus)
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(lhs))
    assert np.allclose(np.trace(lhs, axis1=1, axis2=2), np.trace(a * X + b * Y), atol=1e-8)


def test_propagate_operator_rejects_bad_shapes():
    L = build_liouvillian(effective_hamiltonian(reference_params(fock_dim=3)), [])
    with pytest.raises(DimensionError):
        propagate_operator(L, np.eye(5), 0.0, 1.0)
    with pytest.raises(ValueError):
        propagate_operator(L, np.eye(6), 0.0, [-1.0])


def test_interaction_frame_matches_lab_frame():
    p = reference_params(g=100e6, omega_p=100e6, epsilon=0.0, fock_dim=6)
    psi0 = basis_state((2, 6), (1, 0))
    t = np.linspace(0, 50e-9, 6)
    lab = schrodinger_evolve(lab_hamiltonian(p, "lab"), psi0, t, store_states=True)
    rot = schrodinger_evolve(lab_hamiltonian(p, "interaction"), psi0, t, store_states=True)
    for k, tk in enumerate(t):
        assert np.max(np.abs(lab.states[k] - frame_phases(p, "interaction", tk) * rot.states[k])) < 1e-6


def test_drive_frame_matches_lab_frame():
    p = reference_params(fock_dim=5, epsilon=5e6)
    psi0 = basis_state((2, 5), (0, 0))
    t = np.linspace(0, 20e-9, 5)
    lab = schrodinger_evolve(lab_hamiltonian(p, "lab"), psi0, t, store_states=True)
    rot = schrodinger_evolve(lab_hamiltonian(p, "drive"), psi0, t, store_states=True)
    for k, tk in enumerate(t):
        assert np.max(np.abs(lab.states[k] - frame_phases(p, "drive", tk) * rot.states[k])) < 1e-6


def test_tolerance_halving_self_consistent():
    p = reference_params(fock_dim=6)
    o = operators(6)
    n = 12
    rho0 = np.zeros((n, n), complex)
    rho0[0, 0] = 1
    H = lab_hamiltonian(p, "drive")
    t = np.linspace(0, 200e-9, 5)
    a = mesolve(H, rho0, collapse_operators(p), t, {"n": o.n}, rtol=1e-6, atol=1e-8)
    b = mesolve(H, rho0, collapse_operators(p), t, {"n": o.n}, rtol=5e-7, atol=5e-9)
    assert np.max(np.abs(a["n"] - b["n"])) < 1e-6


def test_periodic_evolve_matches_direct_integration():
    p = reference_params(fock_dim=5, epsilon=1e6)
    o = operators(5)
    H = lab_hamiltonian(p, "drive")
    c = collapse_operators(p)
    prop = PeriodicPropagator(liouvillian_generator(H, c), p.omega_f, n_phase=8)
    rho0 = np.zeros((10, 10), complex)
    rho0[0, 0] = 1
    step = prop.period / 8
    times = np.array([3, 17, 80, 203]) * step
    per = periodic_evolve(prop, rho0, times, {"n": o.n})
    direct = mesolve(H, rho0, c, np.concatenate([[0.0], times]), {"n": o.n})
    assert np.allclose(per["n"], direct["n"][1:], atol=1e-8)
    assert per.meta["trace_drift"] < 1e-8


def test_periodic_propagator_rejects_incommensurate_generator():
    p = reference_params(fock_dim=3)
    gen = liouvillian_generator(lab_hamiltonian(p, "drive"), collapse_operators(p))
    with pytest.raises(ValueError):
        PeriodicPropagator(gen, p.omega_f * 1.37)


def test_stiffness_error_names_rate():
    p = reference_params(fock_dim=4)
    gen = schrodinger_generator(lab_hamiltonian(p))
    with pytest.raises(StiffnessError, match="rad/s"):
        _integrate.integrate(gen, basis_state((2, 4), (1, 0)).amplitudes, [0, 1e-6],
                             max_steps=10)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), {})
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), {"x": np.zeros(3)})
    with pytest.raises(DimensionError):
        schrodinger_evolve(Operator(np.eye(2), (2,)), basis_state((3,), (0,)), [0, 1])


def test_harmonic_operator_evolution_accepts_static_operator():
    M = 3
    H = HarmonicOperator(Operator(np.zeros((2 * M, 2 * M)), (2, M)))
    traj = schrodinger_evolve(H, basis_state((2, M), (1, 2)), [0, 1, 2])
    assert traj.meta["norm_drift"] < 1e-14


def test_pure_python_backend_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, PHONON_BLOCKADE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c",
                          "import phonon_blockade as pb; print(pb.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"

"""Property-based checks of the numerical invariants."""
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from phonon_blockade.analytic import four_state_oracle, g2_analytic, steady_amplitudes
from phonon_blockade.dynamics import mesolve
from phonon_blockade.model import (SystemParams, collapse_operators, derive,
                                   effective_hamiltonian, lab_hamiltonian, reference_params)
from phonon_blockade.observables import g2_tau, g2_zero
from phonon_blockade.operators import (DensityMatrix, Operator, coherent_dm, destroy, expect,
                                       identity, pauli, tensor)
from phonon_blockade.steadystate import steadystate_direct
from phonon_blockade.superop import build_liouvillian

pos = st.floats(0.05, 5.0)
seeds = st.integers(0, 2 ** 32 - 1)


def rand_dm(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@st.composite
def effective_params(draw):
    return reference_params(
        epsilon=draw(st.floats(0.01e6, 1e6)), delta_d=draw(st.floats(-2e6, 2e6)),
        gamma=draw(st.floats(0.2e6, 5e6)), gamma_phi=draw(st.floats(0.0, 2e6)),
        Q=draw(st.floats(2e3, 5e4)), n_th=draw(st.floats(0.0, 0.5)),
        fock_dim=draw(st.integers(4, 7)))


@given(seeds, st.integers(2, 6))
def test_expect_of_hermitian_is_real(seed, M):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2 * M, 2 * M)) + 1j * rng.standard_normal((2 * M, 2 * M))
    A = Operator(a + a.conj().T, (2, M))
    rho = DensityMatrix(rand_dm(2 * M, seed + 1), (2, M))
    assert abs(expect(A, rho).imag) < 1e-9


@given(st.integers(2, 4), st.integers(2, 4), st.integers(2, 3))
def test_tensor_dims_multiply(a, b, c):
    op = tensor(destroy(a), identity(b), destroy(c))
    assert op.dims == (a, b, c) and op.data.shape == (a * b * c,) * 2


@given(effective_params())
def test_liouvillian_trace_preserving_and_steady_state_valid(p):
    L = build_liouvillian(effective_hamiltonian(p), collapse_operators(p))
    assert L.trace_leak() < 1e-9
    rho = steadystate_direct(L)
    assert abs(np.trace(rho.data) - 1) < 1e-8
    assert np.max(np.abs(rho.data - rho.data.conj().T)) < 1e-10
    assert rho.min_eigenvalue() >= -1e-8
    assert np.max(np.abs(L.apply(rho.data))) < 1e-6 * np.max(np.abs(L.matrix.data))


@given(effective_params(), seeds)
def test_mesolve_keeps_state_physical(p, seed):
    n = 2 * p.fock_dim
    traj = mesolve(effective_hamiltonian(p), rand_dm(n, seed), collapse_operators(p),
                   np.linspace(0, 3 / p.kappa, 4), store_states=True)
    assert traj.meta["trace_drift"] < 1e-8
    for rho in traj.states:
        assert np.linalg.eigvalsh(rho).min() >= -1e-8


@given(effective_params())
def test_regression_coincides_at_zero_delay(p):
    L = build_liouvillian(effective_hamiltonian(p), collapse_operators(p))
    rho = steadystate_direct(L)
    cc = g2_tau(L, rho, [0.0, 0.5 / p.kappa])
    assert abs(cc.values[0] - g2_zero(rho)) < 1e-9


@given(st.floats(0.01, 0.5))
def test_coherent_state_poissonian(n_mean):
    rho = coherent_dm(20, math.sqrt(n_mean), qubit="g")
    assert abs(g2_zero(rho) - 1) < 1e-3


@given(pos, pos, pos, pos, st.floats(0.01, 100))
def test_g2_analytic_homogeneous(eps, kappa, gamma, lam, s):
    a = g2_analytic(eps, kappa, gamma, lam)
    assert math.isclose(g2_analytic(s * eps, s * kappa, s * gamma, s * lam), a, rel_tol=1e-12)
    pop = steady_amplitudes(eps, kappa, gamma, lam).populations
    assert math.isclose(2 * pop["c2g"] / pop["c1g"] ** 2, a, rel_tol=1e-12)


@given(pos, pos, pos, pos)
def test_oracle_normalized_with_real_c1g(eps, kappa, gamma, lam):
    res = four_state_oracle(eps, kappa, gamma, lam)
    assert math.isclose(sum(res.amplitudes.populations.values()), 1.0, rel_tol=1e-12)
    assert res.amplitudes.c1g.imag == 0 and res.amplitudes.c1g.real > 0


@given(st.floats(0.5, 20), st.floats(0.01, 0.2), st.floats(0.01, 0.2), st.floats(1.5, 2.5))
def test_derive_scale_covariant(s, gr, opr, dr):
    w0 = 1.0
    p = SystemParams(omega0=w0, g=gr, omega_p_drive=opr, delta=dr)
    q = SystemParams(omega0=s * w0, g=s * gr, omega_p_drive=s * opr, delta=s * dr)
    a, b = derive(p), derive(q)
    assert math.isclose(b.lambda_eff, s * a.lambda_eff, rel_tol=1e-12)
    assert math.isclose(b.delta_tilde, s * a.delta_tilde, rel_tol=1e-12)
    assert math.isclose(b.theta, a.theta, rel_tol=1e-12)


@given(st.floats(0.0, 1e-6), st.sampled_from(["lab", "drive", "interaction"]))
def test_hamiltonians_hermitian_at_any_time(t, frame):
    H = lab_hamiltonian(reference_params(fock_dim=4, epsilon=1e6), frame)
    assert H(t).is_hermitian()


@given(st.sampled_from(["z", "x", "y"]))
def test_pauli_square_identity(which):
    P = pauli(which).data
    assert np.allclose(P @ P, np.eye(2))

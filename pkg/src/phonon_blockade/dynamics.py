"""Time evolution of pure states, density matrices and regression operators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _integrate
from ._integrate import DEFAULT_ATOL, DEFAULT_RTOL, HarmonicGenerator, integrate
from .errors import DimensionError
from .operators import DensityMatrix, HarmonicOperator, Operator, StateVector
from .superop import Liouvillian, liouvillian_generator, schrodinger_generator, unvec, vec


@dataclass
class Trajectory:
    """Observables sampled at ``times``; ``states`` only when requested."""

    times: np.ndarray
    records: dict[str, np.ndarray]
    states: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name, vals in self.records.items():
            if len(vals) != len(self.times):
                raise ValueError(f"record {name!r} has {len(vals)} samples, expected {len(self.times)}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.records[name]


def _as_harmonic(H) -> HarmonicOperator:
    if isinstance(H, HarmonicOperator):
        return H
    if isinstance(H, Operator):
        return HarmonicOperator(H)
    raise TypeError("H must be an Operator or a HarmonicOperator")


def _times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return times


def _obs_matrices(observables, dims):
    out = {}
    for name, A in (observables or {}).items():
        if isinstance(A, Operator):
            if A.dims != dims:
                raise DimensionError(f"observable {name!r} has dims {A.dims}, state {dims}")
            out[name] = A.data
        else:
            out[name] = np.asarray(A)
    return out


def schrodinger_evolve(H, psi0: StateVector, times, observables=None, *,
                       rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, store_states=False,
                       backend=None) -> Trajectory:
    """Integrate ``i d|psi>/dt = H(t)|psi>`` from ``times[0]`` and record ``<A>``.

    ``meta["norm_drift"]`` is the largest deviation of ``|psi|`` from 1.
    """
    H = _as_harmonic(H)
    if psi0.dims != H.dims:
        raise DimensionError(f"state dims {psi0.dims} != Hamiltonian dims {H.dims}")
    times = _times(times)
    gen = schrodinger_generator(H)
    psi = integrate(gen, psi0.amplitudes, times, rtol=rtol, atol=atol, backend=backend)
    records = {}
    for name, A in _obs_matrices(observables, H.dims).items():
        records[name] = np.real(np.einsum("ti,ij,tj->t", psi.conj(), A, psi))
    drift = float(np.max(np.abs(np.linalg.norm(psi, axis=1) - 1.0)))
    return Trajectory(times, records, psi if store_states else None,
                      {"norm_drift": drift, "rtol": rtol, "atol": atol})


def _rho_data(rho0, dims):
    if isinstance(rho0, StateVector):
        rho0 = rho0.to_dm()
    if isinstance(rho0, DensityMatrix):
        if rho0.dims != dims:
            raise DimensionError(f"state dims {rho0.dims} != Hamiltonian dims {dims}")
        return rho0.data
    return np.asarray(rho0, dtype=complex)


def mesolve(H, rho0, c_ops, times, observables=None, *, rtol=DEFAULT_RTOL,
            atol=DEFAULT_ATOL, store_states=False, backend=None,
            generator: HarmonicGenerator | None = None) -> Trajectory:
    """Integrate the Lindblad master equation and record ``Tr[A rho(t)]``.

    States are returned Hermitian-projected, ``(rho + rho^dag)/2``; the
    integration itself is linear in ``vec(rho)``.  ``meta["trace_drift"]``
    is the largest deviation of the trace from its initial value.
    """
    H = _as_harmonic(H)
    times = _times(times)
    gen = generator or liouvillian_generator(H, c_ops)
    rho = _rho_data(rho0, H.dims)
    n = rho.shape[0]
    out = integrate(gen, vec(rho), times, rtol=rtol, atol=atol, backend=backend)
    rhos = unvec(out.T, n).transpose(2, 0, 1)
    rhos = 0.5 * (rhos + rhos.conj().transpose(0, 2, 1))
    records = {}
    for name, A in _obs_matrices(observables, H.dims).items():
        records[name] = np.real(np.einsum("ij,tji->t", A, rhos))
    traces = np.real(np.einsum("tii->t", rhos))
    drift = float(np.max(np.abs(traces - np.trace(rho).real)))
    return Trajectory(times, records, rhos if store_states else None,
                      {"trace_drift": drift, "rtol": rtol, "atol": atol})


def propagate_operator(L, X, t0: float, tau, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                       backend=None) -> np.ndarray:
    """Evolve an arbitrary matrix ``X`` under the Lindblad generator.

    ``L`` is a :class:`Liouvillian` or a :class:`HarmonicGenerator`.  Returns
    ``X(t0 + tau)``; for an array of delays the result is stacked along axis 0.
    """
    gen = L.generator() if isinstance(L, Liouvillian) else L
    X = X.data if isinstance(X, (Operator, DensityMatrix)) else np.asarray(X, dtype=complex)
    n = X.shape[0]
    if n * n != gen.dim:
        raise DimensionError(f"matrix of size {n} does not fit generator of size {gen.dim}")
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise ValueError("delays must be non-negative")
    order = np.argsort(taus, kind="stable")
    out = integrate(gen, vec(X), t0 + taus[order], t0=t0, rtol=rtol, atol=atol, backend=backend)
    res = np.empty((len(taus), n, n), dtype=complex)
    res[order] = unvec(out.T, n).transpose(2, 0, 1)
    return res[0] if np.ndim(tau) == 0 else res


class PeriodicPropagator:
    """One-period propagator of a periodic master equation.

    ``phi`` maps ``vec(rho(t))`` to ``vec(rho(t + T))`` for ``t`` a multiple of
    the period; ``samples[j]`` maps ``vec(rho(0))`` to ``vec(rho(j T / n_phase))``.
    Every frequency of the generator must be an integer multiple of ``omega``.
    """

    def __init__(self, gen: HarmonicGenerator, omega: float, n_phase: int = 40, *,
                 rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, backend=None):
        if omega <= 0:
            raise ValueError("drive frequency must be positive")
        harmonics = np.asarray(gen.freqs) / omega
        if np.max(np.abs(harmonics - np.round(harmonics))) > 1e-9:
            raise ValueError("generator frequencies are not harmonics of the drive frequency")
        self.gen = gen
        self.omega = float(omega)
        self.period = 2.0 * np.pi / omega
        self.n_phase = int(n_phase)
        self.phases = np.arange(self.n_phase + 1) * self.period / self.n_phase
        self.rtol, self.atol, self.backend = rtol, atol, backend
        d = gen.dim
        eye = np.eye(d, dtype=complex)
        # integrate the identity; columns are the propagator
        out = integrate(gen, eye, self.phases, t0=0.0, rtol=rtol, atol=atol, dense=True,
                        backend=backend)
        self.samples = out[:-1]
        self.phi = out[-1]
        self.dim = d

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.phi, int(k))

    def floquet_state(self) -> np.ndarray:
        """Eigenvector of ``phi`` with eigenvalue closest to 1, trace-normalized."""
        w, v = np.linalg.eig(self.phi)
        k = int(np.argmin(np.abs(w - 1.0)))
        n = int(round(np.sqrt(self.dim)))
        rho = unvec(v[:, k], n)
        return rho / np.trace(rho)

    def evolve_from(self, X, t0: float, t1: float) -> np.ndarray:
        """Integrate ``vec(X)`` from ``t0`` to ``t1`` (short intervals)."""
        return self.evolve_many(X, t0, [t1])[0]

    def evolve_many(self, X, t0: float, times) -> np.ndarray:
        """``vec(X)`` integrated from ``t0`` and sampled at sorted ``times``."""
        return integrate(self.gen, vec(X), times, t0=t0, rtol=self.rtol, atol=self.atol,
                         backend=self.backend)


def backend_name() -> str:
    return _integrate.BACKEND


def periodic_evolve(prop: PeriodicPropagator, rho0, times, observables=None) -> Trajectory:
    """Master-equation evolution composed from a one-period propagator.

    Sample times are snapped to the propagator's phase lattice
    (``T / n_phase``); ``rho(k T + s) = P(s) phi^k rho(0)``.  Long runs cost a
    matrix-vector product per period instead of a full integration.
    """
    times = _times(times)
    step = prop.period / prop.n_phase
    idx = np.unique(np.rint(times / step).astype(int))
    if idx[0] < 0:
        raise ValueError("times must be non-negative")
    n = int(round(np.sqrt(prop.dim)))
    rho = rho0.data if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    dims = rho0.dims if isinstance(rho0, DensityMatrix) else (2, n // 2)
    obs = _obs_matrices(observables, dims)
    names = list(obs)
    rows = np.array([vec(obs[k].T) for k in names]).reshape(len(names), n * n)
    K, rem = np.divmod(idx, prop.n_phase)
    state, kcur = vec(rho), 0
    vals = np.zeros((len(names), len(idx)))
    traces = np.zeros(len(idx))
    tr_row = vec(np.eye(n))
    for j, (k, r) in enumerate(zip(K, rem)):
        if k - kcur > 64:
            state = prop.power(k - kcur) @ state
            kcur = k
        while kcur < k:
            state = prop.phi @ state
            kcur += 1
        v = prop.samples[r] @ state
        vals[:, j] = np.real(rows @ v)
        traces[j] = np.real(tr_row @ v)
    records = {k: vals[i] for i, k in enumerate(names)}
    return Trajectory(idx * step, records,
                      meta={"trace_drift": float(np.max(np.abs(traces - np.trace(rho).real))),
                            "snapped_to": step})

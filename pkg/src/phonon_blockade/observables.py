"""Phonon statistics, regression-theorem correlations and detection observables."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._integrate import DEFAULT_ATOL, DEFAULT_RTOL
from .dynamics import PeriodicPropagator, propagate_operator
from .errors import UndefinedCorrelationError
from .operators import DensityMatrix, destroy
from .superop import Liouvillian, unvec, vec

MEAN_FLOOR = 1e-12
P2_FLOOR = 1e-14


def _split(rho):
    """Return ``(matrix, fock_dim, has_qubit)``."""
    if isinstance(rho, DensityMatrix):
        dims = rho.dims
        data = rho.data
    else:
        data = np.asarray(rho)
        dims = (2, data.shape[0] // 2)
    if len(dims) == 1:
        return data, dims[0], False
    return data, dims[-1], True


def _mech_ops(fock_dim, qubit):
    b = destroy(fock_dim).data
    if qubit:
        b = np.kron(np.eye(2), b)
    n = b.conj().T @ b
    return b, n


def phonon_distribution(rho) -> np.ndarray:
    """``P_n = Tr[(I x |n><n|) rho]`` for ``n = 0..M-1``."""
    data, M, qubit = _split(rho)
    pops = np.real(np.diag(data))
    return pops.reshape(2, M).sum(axis=0) if qubit else pops


def mean_phonon_number(rho) -> float:
    p = phonon_distribution(rho)
    return float(np.dot(np.arange(p.size), p))


def g2_zero(rho) -> float:
    """``Tr[b+ b+ b b rho] / Tr[b+ b rho]^2``."""
    p = phonon_distribution(rho)
    n = np.arange(p.size)
    mean = float(np.dot(n, p))
    if mean <= MEAN_FLOOR:
        raise UndefinedCorrelationError(f"mean phonon number {mean:.3g} is too small for g2")
    return float(np.dot(n * (n - 1), p) / mean ** 2)


def truncation_fidelity(rho) -> float:
    """Population of ``{|g,0>, |g,1>, |g,2>, |e,0>}``."""
    data, M, _ = _split(rho)
    pops = np.real(np.diag(data))
    idx = [0, 1, 2, M] if M > 2 else [0, 1, M]
    return float(pops[idx].sum())


def outside_probability(rho) -> float:
    data, M, _ = _split(rho)
    pops = np.real(np.diag(data))
    mask = np.ones(pops.size, dtype=bool)
    mask[[0, 1, 2, M]] = False
    return float(pops[mask].sum())


def detection_quantities(rho) -> dict:
    """Excited-qubit population ``P_e``, two-phonon population ``P_2`` and ``R = P_e / P_2``.

    ``R`` is ``nan`` when ``P_2`` is below the floor.
    """
    data, M, _ = _split(rho)
    pops = np.real(np.diag(data)).reshape(2, M)
    p_e = float(pops[1].sum())
    p_2 = float(pops[:, 2].sum()) if M > 2 else 0.0
    ratio = p_e / p_2 if p_2 > P2_FLOOR else float("nan")
    return {"P_e": p_e, "P_2": p_2, "R": ratio}


@dataclass(frozen=True)
class CorrelationCurve:
    taus: np.ndarray
    values: np.ndarray
    reference: float

    def __post_init__(self):
        object.__setattr__(self, "taus", np.asarray(self.taus, dtype=float))
        # tiny negative values are integration noise around zero
        object.__setattr__(self, "values", np.maximum(np.asarray(self.values, dtype=float), -1e-9))

    def has_dip(self) -> bool:
        """Strict local minimum at ``tau = 0``."""
        return bool(len(self.values) > 1 and self.values[1] > self.values[0])


def g2_tau(model, rho_ss, taus, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
           n_t0=8, mean_n=None, backend=None) -> CorrelationCurve:
    """Delayed correlation ``<b+ b+(tau) b(tau) b> / <n>^2`` by quantum regression.

    ``model`` is a static :class:`Liouvillian` or a :class:`PeriodicPropagator`.
    For the static case ``X(0) = b rho b+`` is evolved and ``rho_ss`` must be
    stationary.  For the periodic case ``rho_ss`` is the state at phase zero
    of the settled regime (``vec`` or matrix), delays are snapped to the
    propagator's phase lattice, and the numerator is averaged over ``n_t0``
    start phases spread over one period; the denominator uses the phase
    averaged ``<n>`` (or ``mean_n`` when given).
    """
    if isinstance(model, PeriodicPropagator):
        return _g2_tau_periodic(model, rho_ss, taus, n_t0=n_t0, mean_n=mean_n)
    if not isinstance(model, Liouvillian):
        raise TypeError("model must be a Liouvillian or a PeriodicPropagator")
    data, M, qubit = _split(rho_ss)
    b, nop = _mech_ops(M, qubit)
    mean = float(np.real(np.trace(nop @ data)))
    if mean <= MEAN_FLOOR:
        raise UndefinedCorrelationError(f"mean phonon number {mean:.3g} is too small for g2")
    drift = float(np.max(np.abs(model.apply(data))))
    if drift > 1e-6 * max(1.0, float(np.max(np.abs(model.matrix.data)))):
        warnings.warn(f"rho_ss is not stationary (|L rho| = {drift:.3g})", stacklevel=2)
    taus = np.asarray(taus, dtype=float)
    X0 = b @ data @ b.conj().T
    Xs = propagate_operator(model, X0, 0.0, taus, rtol=rtol, atol=atol, backend=backend)
    num = np.real(np.einsum("ij,tji->t", nop, Xs))
    num[taus == 0] = np.real(np.trace(nop @ X0))
    return CorrelationCurve(taus, num / mean ** 2, g2_zero(rho_ss))


def _g2_tau_periodic(prop: PeriodicPropagator, rho0, taus, *, n_t0, mean_n):
    d = prop.dim
    n = int(round(np.sqrt(d)))
    M = n // 2
    b, nop = _mech_ops(M, True)
    rho0 = np.asarray(rho0, dtype=complex)
    v0 = rho0 if rho0.ndim == 1 else vec(rho0)
    nph = prop.n_phase
    if nph % n_t0:
        raise ValueError(f"{n_t0} start phases do not divide the {nph}-point lattice")
    step = prop.period / nph
    q = np.rint(np.asarray(taus, dtype=float) / step).astype(int)
    if np.any(q < 0):
        raise ValueError("delays must be non-negative")
    nrow = vec(nop.T)
    rows = np.array([nrow @ S for S in prop.samples])  # Tr[N P(s_b) .]
    states = prop.samples @ v0                         # rho(s_j), one per phase
    mean = mean_n
    if mean is None:
        mean = float(np.mean(np.real(states @ nrow)))
    if mean <= MEAN_FLOOR:
        raise UndefinedCorrelationError(f"mean phonon number {mean:.3g} is too small for g2")
    starts = np.arange(0, nph, nph // n_t0)
    num = np.zeros(len(q))
    g2_0 = 0.0
    for a in starts:
        X = b @ unvec(states[a], n) @ b.conj().T
        g2_0 += np.real(np.trace(nop @ X))
        # X carried to the end of its period, then whole periods by phi
        z = prop.evolve_from(X, a * step, prop.period) if a else prop.phi @ vec(X)
        K, rem = np.divmod(a + q, nph)
        inside = np.flatnonzero(K == 0)
        if inside.size:
            order = inside[np.argsort(rem[inside], kind="stable")]
            vals = prop.evolve_many(X, a * step, rem[order] * step)
            num[order] += np.real(vals @ nrow)
        later = np.flatnonzero(K > 0)
        y, kcur = z, 1
        for i in later[np.argsort(K[later], kind="stable")]:
            while kcur < K[i]:
                y = prop.phi @ y
                kcur += 1
            num[i] += np.real(rows[rem[i]] @ y)
    num /= len(starts)
    g2_0 /= len(starts)
    return CorrelationCurve(q * step, num / mean ** 2, g2_0 / mean ** 2)


def fit_rabi_frequency(times, signal) -> float:
    """Angular frequency of the dominant oscillation in a uniformly sampled signal.

    The spectral peak of the mean-removed, Hann-windowed signal is refined by
    parabolic interpolation of the log magnitude.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    dt = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - dt)) > 1e-6 * abs(dt):
        raise ValueError("fit_rabi_frequency needs uniformly spaced samples")
    y = (y - y.mean()) * np.hanning(y.size)
    nfft = 8 * y.size
    spec = np.abs(np.fft.rfft(y, nfft))
    k = int(np.argmax(spec[1:])) + 1
    if 0 < k < spec.size - 1:
        a, b0, c = np.log(spec[k - 1:k + 2] + 1e-300)
        k = k + 0.5 * (a - c) / (a - 2 * b0 + c)
    return float(2.0 * np.pi * k / (nfft * dt))

"""Stationary states of static and periodically driven master equations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._integrate import DEFAULT_ATOL, DEFAULT_RTOL, integrate
from .errors import ConditioningError, ConvergenceError, MultipleSteadyStatesError
from .operators import DensityMatrix, HarmonicOperator, Operator
from .superop import Liouvillian, build_liouvillian, liouvillian_generator, unvec, vec
from .dynamics import PeriodicPropagator

# Kernel dimension test: a second singular value below this fraction of the
# largest one counts as a second steady state.
DEGENERACY_RTOL = 1e-10
MAX_CONDITION = 1e13


def steadystate_direct(L: Liouvillian) -> DensityMatrix:
    """Null vector of ``L`` with ``Tr rho = 1`` imposed by row replacement."""
    A = L.dense()
    n = L.n
    s = np.linalg.svd(A, compute_uv=False)
    if s[-2] <= DEGENERACY_RTOL * s[0]:
        raise MultipleSteadyStatesError(
            f"Liouvillian kernel is at least two-dimensional (singular values "
            f"{s[-1]:.3g}, {s[-2]:.3g} vs norm {s[0]:.3g})")
    A[0, :] = vec(np.eye(n))
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(f"trace-constrained system is singular (cond ~ {cond:.3g})",
                                condition_number=cond)
    rho = unvec(np.linalg.solve(A, rhs), n)
    return DensityMatrix.from_numeric(rho, L.dims)


def spectral_gap(L: Liouvillian) -> float:
    """Smallest decay rate, ``-max Re(mu)`` over the non-zero eigenvalues ``mu``."""
    mu = np.linalg.eigvals(L.dense())
    mu = mu[np.argsort(np.abs(mu))][1:]
    return float(-np.max(mu.real))


def steadystate(H: Operator, c_ops) -> DensityMatrix:
    return steadystate_direct(build_liouvillian(H, c_ops))


@dataclass
class TimeAverage:
    """Window average of a driven steady state.

    ``means``/``peak_to_peak`` are per observable over the last window;
    ``window_means`` lists the means of every window evaluated.
    """

    rho: DensityMatrix
    means: dict[str, float]
    peak_to_peak: dict[str, float]
    window_means: list[dict[str, float]]
    times: np.ndarray
    samples: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)


def _expect_rows(observables, n):
    # Tr[A X] = vec(A^T) . vec(X)
    names = list(observables)
    rows = np.array([vec(np.asarray(observables[k].data if isinstance(observables[k], Operator)
                                    else observables[k]).T) for k in names])
    return names, rows.reshape(len(names), n * n)


def _window_stats(names, vals):
    means = {k: float(np.mean(vals[i])) for i, k in enumerate(names)}
    ptp = {k: float(np.ptp(vals[i])) for i, k in enumerate(names)}
    return means, ptp


def _check_windows(prev, cur, tol):
    worst = 0.0
    for k in cur:
        scale = max(abs(cur[k]), abs(prev[k]), 1e-12)
        worst = max(worst, abs(cur[k] - prev[k]) / scale)
    if worst > tol:
        raise ConvergenceError(f"window means drift by {100 * worst:.2f}% between "
                               f"consecutive windows (tolerance {100 * tol:.2f}%)")
    return worst


def _min_rate(c_ops):
    rates = [r for _, r in c_ops if r > 0]
    return min(rates) if rates else None


def steadystate_timeavg(H, c_ops, observables=None, *, transient=None, window=None,
                        samples=200, rho0=None, omega=None, drift_tol=0.01,
                        propagator: PeriodicPropagator | None = None,
                        rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, backend=None) -> TimeAverage:
    """Evolve past a transient, then average ``rho(t)`` uniformly over a window.

    For a periodic ``H`` (drive angular frequency ``omega``) the evolution is
    composed from the one-period propagator: the transient is rounded up to
    whole periods, ``window`` is a number of periods and the ``samples`` per
    window sit on the propagator's phase lattice.  For a static ``H`` the
    window is a duration in seconds.  Two consecutive windows are compared;
    a relative drift of any observable mean above ``drift_tol`` raises
    :class:`ConvergenceError`.

    Defaults: ``transient = 20 / kappa``-like, i.e. 20 over the smallest
    positive rate, and ``window`` of 10 drive periods.
    """
    H = H if isinstance(H, HarmonicOperator) else HarmonicOperator(H)
    n = int(np.prod(H.dims))
    observables = dict(observables or {})
    min_rate = _min_rate(c_ops)
    if transient is None:
        if min_rate is None:
            raise ValueError("no positive dissipation rate; give the transient explicitly")
        transient = 20.0 / min_rate
    elif min_rate is not None and transient < 10.0 / min_rate:
        raise ValueError(f"transient {transient:.3g} s is shorter than 10 / min rate "
                         f"({10.0 / min_rate:.3g} s)")
    if rho0 is None:
        rho0 = np.zeros((n, n), dtype=complex)
        rho0[0, 0] = 1.0
    rho0 = rho0.data if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    names, rows = _expect_rows(observables, n)

    if H.is_static:
        gen = liouvillian_generator(H, c_ops)
        if window is None:
            window = 1.0 / min_rate if min_rate else 1.0
        t = transient + np.arange(2 * samples) * (window / samples)
        out = integrate(gen, vec(rho0), t, t0=0.0, rtol=rtol, atol=atol, backend=backend)
        period_info = {}
    else:
        if omega is None:
            raise ValueError("a time-dependent Hamiltonian needs its drive frequency omega")
        window = 10 if window is None else window
        if window < 5:
            raise ValueError("the averaging window must span at least 5 drive periods")
        if int(window) != window:
            raise ValueError("for a driven model the window is a whole number of periods")
        window = int(window)
        if propagator is None:
            n_phase = max(1, samples // window)
            propagator = PeriodicPropagator(liouvillian_generator(H, c_ops), omega,
                                            n_phase=n_phase, rtol=rtol, atol=atol,
                                            backend=backend)
        prop = propagator
        per_period = samples / window
        stride = prop.n_phase / per_period
        if int(per_period) != per_period or int(stride) != stride:
            raise ValueError(f"{samples} samples over {window} periods do not fit the "
                             f"{prop.n_phase}-point phase lattice")
        per_period, stride = int(per_period), int(stride)
        k = math.ceil(transient / prop.period - 1e-9)
        state = prop.power(k) @ vec(rho0)
        cols = []
        for _ in range(2 * window):
            cols.append(prop.samples[::stride] @ state)
            state = prop.phi @ state
        out = np.concatenate(cols, axis=0)
        t = k * prop.period + np.arange(2 * samples) * (prop.period / per_period)
        period_info = {"period": prop.period, "transient_periods": k}

    first, second = out[:samples], out[samples:]
    v1 = np.real(rows @ first.T) if names else np.zeros((0, samples))
    v2 = np.real(rows @ second.T) if names else np.zeros((0, samples))
    m1, _ = _window_stats(names, v1)
    m2, ptp = _window_stats(names, v2)
    worst = _check_windows(m1, m2, drift_tol) if names else 0.0
    rho_avg = unvec(second.mean(axis=0), n)
    rho = DensityMatrix.from_numeric(rho_avg, H.dims)
    return TimeAverage(rho=rho, means=m2, peak_to_peak=ptp, window_means=[m1, m2],
                       times=t[samples:], samples={k: v2[i] for i, k in enumerate(names)},
                       meta={"transient": transient, "window": window, "samples": samples,
                             "window_drift": worst, "trace_error": abs(np.trace(rho_avg) - 1),
                             **period_info})

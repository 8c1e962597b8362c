"""Compare the compiled DOP853 kernel with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N] [--quick]``.
Three workloads cover the regimes the package hits:

``rabi``        20-dim state vector over 1 us of the full Hamiltonian (step overhead)
``vector``      400-dim Liouvillian vector over 20 drive periods
``monodromy``   400 x 400 identity block over one drive period (propagator build)

For each the script reports wall times, speed-up and the largest relative
difference between the two backends.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from phonon_blockade import _integrate
from phonon_blockade.model import collapse_operators, lab_hamiltonian, reference_params
from phonon_blockade.operators import basis_state
from phonon_blockade.superop import liouvillian_generator, schrodinger_generator


def workloads(quick=False):
    p = reference_params()
    T = 2 * np.pi / p.omega_f
    lgen = liouvillian_generator(lab_hamiltonian(p, frame="drive"), collapse_operators(p))
    rho0 = np.zeros(lgen.dim, dtype=complex)
    rho0[0] = 1.0

    r = reference_params(g=100e6, epsilon=0.0, gamma=0.0, Q=float("inf"))
    sgen = schrodinger_generator(lab_hamiltonian(r, frame="lab"))
    psi0 = basis_state((2, r.fock_dim), (1, 0)).amplitudes

    cols = 40 if quick else lgen.dim
    yield "rabi", sgen, psi0, np.linspace(0, 0.2e-6 if quick else 1e-6, 101), {}
    yield "vector", lgen, rho0, np.linspace(0, (5 if quick else 20) * T, 11), {}
    yield "monodromy", lgen, np.eye(lgen.dim, cols, dtype=complex), np.linspace(0, T, 41), \
        {"dense": True}


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="shorter runs, fewer columns")
    args = ap.parse_args(argv)
    have_compiled = _integrate._dop853_compiled is not None
    print(f"{'workload':10s} {'compiled':>12s} {'python':>12s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, gen, y0, t, kw in workloads(args.quick):
        tp, yp = best_time(lambda: _integrate.integrate(gen, y0, t, backend="python", **kw),
                           args.repeat)
        if not have_compiled:
            print(f"{name:10s} {'n/a':>12s} {tp * 1e3:10.1f}ms")
            continue
        tc, yc = best_time(lambda: _integrate.integrate(gen, y0, t, backend="compiled", **kw),
                           args.repeat)
        diff = np.max(np.abs(yc - yp)) / np.max(np.abs(yp))
        print(f"{name:10s} {tc * 1e3:10.1f}ms {tp * 1e3:10.1f}ms {tp / tc:8.1f}x {diff:13.2e}")


if __name__ == "__main__":
    main()

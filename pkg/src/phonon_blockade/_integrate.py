"""Adaptive Dormand-Prince 8(5,3) integration of harmonic linear ODEs.

Every evolution in the package reduces to

    dY/dt = sum_k exp(1j * w_k * t) A_k @ Y

with sparse ``A_k`` (a Schrodinger generator ``-iH`` or a Liouvillian).  The
compiled kernel in ``_kernels.pyx`` is used when it was built; otherwise the
numpy implementation below runs the identical algorithm.  Set
``PHONON_BLOCKADE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import DOP853

from .errors import StiffnessError

try:
    if os.environ.get("PHONON_BLOCKADE_PURE_PYTHON"):
        raise ImportError("pure-python backend forced")
    from ._kernels import dop853 as _dop853_compiled
    BACKEND = "compiled"
except ImportError:
    _dop853_compiled = None
    BACKEND = "python"

# Tableau, error weights and dense-output coefficients of DOP853 (reused from
# scipy so both backends share one source of truth).
def _arr(x):
    return np.ascontiguousarray(np.asarray(x, dtype=float))


_NSTAGES = DOP853.n_stages
_A = _arr(DOP853.A)
_B = _arr(DOP853.B)
_C = _arr(DOP853.C)
_E3 = _arr(DOP853.E3)
_E5 = _arr(DOP853.E5)
_D = _arr(DOP853.D)
_AX = _arr(DOP853.A_EXTRA)
_CX = _arr(DOP853.C_EXTRA)

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
DEFAULT_MAX_STEPS = 50_000_000


@dataclass(frozen=True)
class HarmonicGenerator:
    """Generator ``G(t) = sum_k exp(1j*w_k*t) A_k`` with CSR blocks.

    A static part is simply a block with frequency zero.
    """

    freqs: tuple[float, ...]
    blocks: tuple[sp.csr_matrix, ...]
    _packed: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.freqs) != len(self.blocks) or not self.blocks:
            raise ValueError("need one frequency per block and at least one block")
        n = self.blocks[0].shape[0]
        for blk in self.blocks:
            if blk.shape != (n, n):
                raise ValueError("generator blocks must be square and equal-sized")

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def is_static(self) -> bool:
        return all(w == 0.0 for w in self.freqs)

    def at(self, t: float) -> sp.csr_matrix:
        out = None
        for w, blk in zip(self.freqs, self.blocks):
            term = blk * np.exp(1j * w * t) if w else blk
            out = term if out is None else out + term
        return out.tocsr()

    def apply(self, t: float, y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(y)
        for w, blk in zip(self.freqs, self.blocks):
            if w:
                out += np.exp(1j * w * t) * (blk @ y)
            else:
                out += blk @ y
        return out

    def fastest_rate(self) -> float:
        """Crude upper bound on the fastest dynamical rate (rad/s)."""
        bound = sum(abs(blk).sum(axis=1).max() for blk in self.blocks)
        return float(bound + max(abs(w) for w in self.freqs))

    def packed(self):
        if not self._packed:
            data, indices, indptr = [], [], []
            offset = 0
            for blk in self.blocks:
                blk = blk.tocsr()
                blk.sort_indices()
                data.append(blk.data.astype(np.complex128))
                indices.append(blk.indices.astype(np.int64))
                indptr.append(blk.indptr.astype(np.int64) + offset)
                offset += blk.nnz
            self._packed.update(
                freqs=np.ascontiguousarray(self.freqs, dtype=float),
                data=np.ascontiguousarray(np.concatenate(data)),
                indices=np.ascontiguousarray(np.concatenate(indices)),
                indptr=np.ascontiguousarray(np.vstack(indptr)),
            )
        p = self._packed
        return p["freqs"], p["data"], p["indices"], p["indptr"]


def _initial_step(gen, t0, y0, rtol, atol):
    # Hairer, Norsett & Wanner, "Solving ODEs I", II.4 (same rule scipy uses).
    f0 = gen.apply(t0, y0)
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = gen.apply(t0 + h0, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 8)
    return min(100 * h0, h1)


def _dop853_python(y0, gen, t0, t_eval, h, rtol, atol, max_step, max_steps, land=False):
    n, m = y0.shape
    out = np.zeros((len(t_eval), n, m), dtype=np.complex128)
    y = y0.copy()
    t = t0
    t_end = t_eval[-1]
    idx = 0
    while idx < len(t_eval) and t_eval[idx] <= t0:
        out[idx] = y
        idx += 1
    stats = {"nsteps": 0, "nfev": 0, "nrejected": 0}
    K = np.empty((_NSTAGES + 4, n, m), dtype=np.complex128)
    if idx < len(t_eval):
        K[0] = gen.apply(t, y)
        stats["nfev"] += 1
    status = 0
    factor = 1.0
    while idx < len(t_eval):
        if stats["nsteps"] >= max_steps:
            status = 2
            break
        rejected = False
        target = t_eval[idx] if land else t_end
        while True:
            h = min(h, max_step)
            h_try = h
            last = t + h >= target
            if last:
                h = target - t
            if h <= 10 * np.finfo(float).eps * abs(t) or h <= 1e-300:
                status = 1
                break
            for s in range(1, _NSTAGES):
                dy = np.tensordot(_A[s, :s], K[:s], axes=1) * h
                K[s] = gen.apply(t + _C[s] * h, y + dy)
            y_new = y + h * np.tensordot(_B, K[:_NSTAGES], axes=1)
            K[_NSTAGES] = gen.apply(t + h, y_new)
            stats["nfev"] += _NSTAGES
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            e5 = np.sum(np.abs(np.tensordot(_E5, K[:_NSTAGES + 1], axes=1) / scale) ** 2)
            e3 = np.sum(np.abs(np.tensordot(_E3, K[:_NSTAGES + 1], axes=1) / scale) ** 2)
            if e5 == 0 and e3 == 0:
                err_norm = 0.0
            else:
                err_norm = abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * y.size)
            if err_norm < 1:
                factor = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm ** -0.125)
                if rejected:
                    factor = min(1.0, factor)
                break
            h *= max(0.2, 0.9 * err_norm ** -0.125)
            rejected = True
            stats["nrejected"] += 1
        if status:
            break
        F = None
        while idx < len(t_eval) and t_eval[idx] <= t + h:
            if last and t_eval[idx] >= target:
                out[idx] = y_new
                idx += 1
                continue
            if F is None:
                for r, s in enumerate(range(_NSTAGES + 1, _NSTAGES + 4)):
                    dy = np.tensordot(_AX[r, :s], K[:s], axes=1) * h
                    K[s] = gen.apply(t + _CX[r] * h, y + dy)
                stats["nfev"] += 3
                delta = y_new - y
                F = np.empty((7, n, m), dtype=np.complex128)
                F[0] = delta
                F[1] = h * K[0] - delta
                F[2] = 2 * delta - h * (K[_NSTAGES] + K[0])
                F[3:] = h * np.tensordot(_D, K, axes=1)
            x = (t_eval[idx] - t) / h
            acc = np.zeros_like(y)
            for i, f in enumerate(F[::-1]):
                acc += f
                acc *= x if i % 2 == 0 else 1 - x
            out[idx] = acc + y
            idx += 1
        t = target if last else t + h
        y = y_new
        K[0] = K[_NSTAGES]
        stats["nsteps"] += 1
        if last and not rejected and h_try > h:
            # a clipped step should not throttle the next one
            h = h_try
        else:
            h *= factor
        while last and idx < len(t_eval) and t_eval[idx] <= t:
            out[idx] = y
            idx += 1
    stats.update(t=t, h=h)
    return out, status, stats


def integrate(gen: HarmonicGenerator, y0, t_eval, t0=None, *, rtol=DEFAULT_RTOL,
              atol=DEFAULT_ATOL, max_step=np.inf, max_steps=DEFAULT_MAX_STEPS,
              dense=False, backend=None):
    """Integrate ``dY/dt = G(t) Y`` and return ``Y`` sampled at ``t_eval``.

    ``y0`` may be a vector ``(n,)`` or a block ``(n, m)``; the output has shape
    ``(len(t_eval),) + y0.shape``.  ``t_eval`` must be non-decreasing and not
    earlier than ``t0`` (defaults to ``t_eval[0]``).

    By default every step lands on the next output time. ``dense=True``
    instead samples the 7th-order interpolant, which is much cheaper for
    finely sampled output but carries a somewhat larger error than the steps.
    """
    y0 = np.asarray(y0, dtype=np.complex128)
    vector = y0.ndim == 1
    block = np.array(y0.reshape(y0.shape[0], -1), order="C")  # writable copy
    if block.shape[0] != gen.dim:
        raise ValueError(f"state has dimension {block.shape[0]}, generator {gen.dim}")
    t_eval = np.ascontiguousarray(np.atleast_1d(np.asarray(t_eval, dtype=float)))
    if t_eval.size == 0:
        raise ValueError("t_eval is empty")
    if np.any(np.diff(t_eval) < 0):
        raise ValueError("t_eval must be non-decreasing")
    t0 = float(t_eval[0] if t0 is None else t0)
    if t_eval[0] < t0:
        raise ValueError("t_eval starts before t0")
    if not np.isfinite(max_step) or max_step <= 0:
        max_step = max(t_eval[-1] - t0, 1e-300)
    h0 = _initial_step(gen, t0, block, rtol, atol) if t_eval[-1] > t0 else 0.0
    h0 = min(h0, max_step)

    backend = backend or BACKEND
    if backend == "compiled":
        if _dop853_compiled is None:
            raise RuntimeError("compiled kernel is not available")
        freqs, data, indices, indptr = gen.packed()
        out, status, stats = _dop853_compiled(
            block, freqs, data, indices, indptr, t0, t_eval, h0, rtol, atol,
            float(max_step), int(max_steps), _A, _B, _C, _E3, _E5, _D, _AX, _CX,
            not dense)
    else:
        out, status, stats = _dop853_python(
            block, gen, t0, t_eval, h0, rtol, atol, max_step, max_steps, not dense)

    if status:
        reason = "step size underflow" if status == 1 else f"exceeded {max_steps} steps"
        raise StiffnessError(
            f"integration stalled at t={stats['t']:.6g} s ({reason}); fastest "
            f"generator rate ~{gen.fastest_rate():.3e} rad/s",
            fastest_rate=gen.fastest_rate())
    return out[:, :, 0] if vector else out.reshape((len(t_eval),) + y0.shape)

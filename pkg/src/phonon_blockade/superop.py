"""Liouvillian superoperators in the column-stacking convention.

``vec(rho)`` stacks columns, so ``vec(A rho B) = (B^T kron A) vec(rho)``.
In numpy terms ``vec(X) = X.ravel(order="F")``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from ._integrate import HarmonicGenerator
from .errors import DimensionError
from .operators import DensityMatrix, HarmonicOperator, Operator


def vec(X) -> np.ndarray:
    return _dense(X).ravel(order="F")


def unvec(v, n: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    n = n or int(round(np.sqrt(v.shape[0])))
    return v.reshape((n, n) + v.shape[1:], order="F")


def _dense(X) -> np.ndarray:
    return X.data if isinstance(X, (Operator, DensityMatrix)) else np.asarray(X)


def _mat(A):
    return sp.csr_matrix(A.data if isinstance(A, Operator) else A)


def spre(A) -> sp.csr_matrix:
    A = _mat(A)
    return sp.kron(sp.identity(A.shape[0], format="csr"), A, format="csr")


def spost(A) -> sp.csr_matrix:
    A = _mat(A)
    return sp.kron(A.T, sp.identity(A.shape[0], format="csr"), format="csr")


def commutator_super(H) -> sp.csr_matrix:
    """Superoperator of ``rho -> -i [H, rho]``."""
    return (-1j * (spre(H) - spost(H))).tocsr()


def dissipator(A, rate: float) -> sp.csr_matrix:
    """``D[A, rate] rho = (rate/2)(2 A rho A+ - A+A rho - rho A+A)``."""
    if rate < 0:
        raise ValueError(f"negative dissipation rate {rate}")
    A = _mat(A)
    ada = (A.conj().T @ A).tocsr()
    out = sp.kron(A.conj(), A) - 0.5 * spre(ada) - 0.5 * spost(ada)
    return (rate * out).tocsr()


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Static generator acting on column-stacked density matrices."""

    matrix: sp.csr_matrix
    dims: tuple[int, ...]

    @property
    def n(self) -> int:
        return int(np.prod(self.dims))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, rho) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.n)

    def generator(self) -> HarmonicGenerator:
        return HarmonicGenerator((0.0,), (self.matrix,))

    def trace_leak(self) -> float:
        """``|vec(I)^dag L| / |L|``; zero for a trace-preserving generator."""
        row = self.matrix.T @ vec(np.eye(self.n))
        return float(np.linalg.norm(row) / max(sparse_norm(self.matrix), 1e-300))


def _dissipation(c_ops, dims) -> sp.csr_matrix:
    n = int(np.prod(dims))
    total = sp.csr_matrix((n * n, n * n), dtype=complex)
    for A, rate in c_ops:
        if isinstance(A, Operator) and A.dims != tuple(dims):
            raise DimensionError(f"collapse operator dims {A.dims} != {tuple(dims)}")
        if rate < 0:
            raise ValueError(f"negative dissipation rate {rate}")
        if rate:
            total = total + dissipator(A, rate)
    return total.tocsr()


def build_liouvillian(H: Operator, c_ops) -> Liouvillian:
    """``L = -i(I kron H - H^T kron I) + sum_k D[A_k, rate_k]`` for static Hermitian ``H``."""
    if isinstance(H, HarmonicOperator):
        if not H.is_static:
            raise ValueError("build_liouvillian needs a static Hamiltonian")
        H = H.static
    if not H.is_hermitian():
        dev = np.max(np.abs(H.data - H.data.conj().T))
        raise ValueError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {dev:.3g})")
    L = commutator_super(H) + _dissipation(c_ops, H.dims)
    return Liouvillian(L.tocsr(), H.dims)


def liouvillian_generator(H: HarmonicOperator, c_ops) -> HarmonicGenerator:
    """Harmonic generator of the master equation for ``H(t) = sum_k e^{i w_k t} H_k``.

    The ``H_k`` need not be Hermitian individually; their sum is.  The
    commutator is linear in ``H``, so each component maps to one block.
    """
    if not isinstance(H, HarmonicOperator):
        H = HarmonicOperator(H)
    blocks = [commutator_super(H.static) + _dissipation(c_ops, H.dims)]
    freqs = [0.0]
    for w, Hk in H.terms:
        freqs.append(w)
        blocks.append(commutator_super(Hk))
    return HarmonicGenerator(tuple(freqs), tuple(b.tocsr() for b in blocks))


def schrodinger_generator(H: HarmonicOperator) -> HarmonicGenerator:
    if not isinstance(H, HarmonicOperator):
        H = HarmonicOperator(H)
    freqs = [0.0] + [w for w, _ in H.terms]
    blocks = [sp.csr_matrix(-1j * H.static.data)]
    blocks += [sp.csr_matrix(-1j * Hk.data) for _, Hk in H.terms]
    return HarmonicGenerator(tuple(freqs), tuple(blocks))


def lindblad_rhs(H, c_ops, rho) -> np.ndarray:
    """Right side of the master equation evaluated directly on matrices."""
    H = _dense(H)
    rho = _dense(rho)
    out = -1j * (H @ rho - rho @ H)
    for A, rate in c_ops:
        A = _dense(A)
        ad = A.conj().T
        out = out + 0.5 * rate * (2 * A @ rho @ ad - ad @ A @ rho - rho @ ad @ A)
    return out

"""Operators and states on the qubit x resonator Hilbert space.

Basis ordering is fixed everywhere: the qubit factor comes first with
``|g> = 0`` and ``|e> = 1``, the Fock factor second with ascending phonon
number.  Product index of ``|q, n>`` is therefore ``q * fock_dim + n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod

import numpy as np

from .errors import DimensionError

HERMITIAN_ATOL = 1e-12


def _frozen(data) -> np.ndarray:
    arr = np.array(data, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix with subsystem dimensions ``dims``."""

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        data = _frozen(self.data)
        dims = tuple(int(d) for d in self.dims)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"operator matrix must be square, got {data.shape}")
        if data.shape[0] != prod(dims):
            raise DimensionError(f"matrix size {data.shape[0]} != prod(dims) {prod(dims)}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def shape(self):
        return self.data.shape

    @property
    def dag(self) -> Operator:
        return Operator(self.data.conj().T, self.dims)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) < atol)

    def _check(self, other: Operator):
        if self.dims != other.dims:
            raise DimensionError(f"dims {self.dims} and {other.dims} do not match")

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data @ other.data, self.dims)
        if isinstance(other, StateVector):
            if other.dims != self.dims:
                raise DimensionError(f"dims {self.dims} and {other.dims} do not match")
            return self.data @ other.amplitudes
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.data + other.data, self.dims)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.data - other.data, self.dims)

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.dims)

    def __repr__(self):
        return f"Operator(dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True).ravel()
        dims = tuple(int(d) for d in self.dims)
        if amps.size != prod(dims):
            raise DimensionError(f"vector length {amps.size} != prod(dims) {prod(dims)}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector is not normalized (|psi| = {norm:.12g})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, amplitudes, dims) -> StateVector:
        amps = np.asarray(amplitudes, dtype=np.complex128)
        return cls(amps / np.linalg.norm(amps), dims)

    def to_dm(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def __repr__(self):
        return f"StateVector(dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix: unit trace, Hermitian and positive.

    ``atol`` relaxes the checks for states obtained numerically; the default
    bounds are trace 1e-8, Hermiticity 1e-10, smallest eigenvalue -1e-8.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        data = _frozen(self.data)
        dims = tuple(int(d) for d in self.dims)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] != prod(dims):
            raise DimensionError(f"density matrix shape {data.shape} incompatible with dims {dims}")
        tr = np.trace(data)
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"trace is {tr:.12g}, expected 1")
        herm = np.max(np.abs(data - data.conj().T))
        if herm > 1e-10:
            raise ValueError(f"density matrix is not Hermitian (max deviation {herm:.3g})")
        lo = np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0]
        if lo < -1e-8:
            raise ValueError(f"density matrix has eigenvalue {lo:.3g} < 0")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_numeric(cls, data, dims) -> DensityMatrix:
        """Symmetrize and renormalize a numerically computed state before validation."""
        data = np.asarray(data, dtype=np.complex128)
        data = 0.5 * (data + data.conj().T)
        return cls(data / np.trace(data).real, dims)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data)[0])

    def __repr__(self):
        return f"DensityMatrix(dims={list(self.dims)})"


# -- constructors -----------------------------------------------------------

def destroy(fock_dim: int) -> Operator:
    """Truncated annihilation operator ``b`` with ``b[n-1, n] = sqrt(n)``."""
    if int(fock_dim) != fock_dim or fock_dim < 2:
        raise DimensionError(f"fock_dim must be an integer >= 2, got {fock_dim}")
    return Operator(np.diag(np.sqrt(np.arange(1, fock_dim)), 1), (fock_dim,))


def create(fock_dim: int) -> Operator:
    return destroy(fock_dim).dag


def num(fock_dim: int) -> Operator:
    if int(fock_dim) != fock_dim or fock_dim < 2:
        raise DimensionError(f"fock_dim must be an integer >= 2, got {fock_dim}")
    return Operator(np.diag(np.arange(fock_dim, dtype=float)), (fock_dim,))


def identity(dims) -> Operator:
    dims = (dims,) if np.isscalar(dims) else tuple(dims)
    return Operator(np.eye(prod(dims)), dims)


_PAULI = {
    "z": [[-1, 0], [0, 1]],
    "x": [[0, 1], [1, 0]],
    "y": [[0, 1j], [-1j, 0]],  # i(sigma_- - sigma_+) in the |g>,|e> ordering
    "plus": [[0, 0], [1, 0]],
    "minus": [[0, 1], [0, 0]],
}


def pauli(which: str) -> Operator:
    """Qubit operator in the ``(|g>, |e>)`` basis; ``sigma_z = diag(-1, +1)``."""
    try:
        return Operator(np.array(_PAULI[which]), (2,))
    except KeyError:
        raise ValueError(f"unknown Pauli operator {which!r}; use z, x, y, plus or minus") from None


def tensor(*ops) -> Operator:
    """Kronecker product in the given order; accepts operators or one list."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    if not ops:
        raise ValueError("tensor needs at least one operator")
    data = reduce(np.kron, (op.data for op in ops))
    dims = sum((op.dims for op in ops), ())
    return Operator(data, dims)


def expect(A: Operator, rho) -> complex:
    """``Tr[A rho]`` for a density matrix, or ``<psi|A|psi>`` for a pure state.

    The full complex value is returned; for Hermitian ``A`` the imaginary part
    is numerical residue only.
    """
    if isinstance(rho, StateVector):
        if rho.dims != A.dims:
            raise DimensionError(f"dims {A.dims} and {rho.dims} do not match")
        return complex(np.vdot(rho.amplitudes, A.data @ rho.amplitudes))
    if isinstance(rho, (DensityMatrix, Operator)):
        if rho.dims != A.dims:
            raise DimensionError(f"dims {A.dims} and {rho.dims} do not match")
        rho = rho.data
    rho = np.asarray(rho)
    if rho.shape != A.shape:
        raise DimensionError(f"shape {rho.shape} does not match operator {A.shape}")
    # Tr[A rho] without forming the product
    return complex(np.sum(A.data.T * rho))


def basis_state(dims, indices) -> StateVector:
    dims = tuple(int(d) for d in dims)
    indices = tuple(int(i) for i in indices)
    if len(dims) != len(indices):
        raise DimensionError("need one index per subsystem")
    for d, i in zip(dims, indices):
        if not 0 <= i < d:
            raise DimensionError(f"index {i} out of range for dimension {d}")
    amps = np.zeros(prod(dims), dtype=np.complex128)
    amps[np.ravel_multi_index(indices, dims)] = 1.0
    return StateVector(amps, dims)


def fock_projector(n: int, fock_dim: int, qubit: bool = True) -> Operator:
    """``I_2 x |n><n|`` (or just ``|n><n|`` with ``qubit=False``)."""
    if not 0 <= n < fock_dim:
        raise DimensionError(f"Fock index {n} out of range for fock_dim {fock_dim}")
    proj = np.zeros((fock_dim, fock_dim))
    proj[n, n] = 1.0
    op = Operator(proj, (fock_dim,))
    return tensor(identity(2), op) if qubit else op


def qubit_projector(which: str, fock_dim: int) -> Operator:
    """``|e><e| x I`` or ``|g><g| x I``."""
    idx = {"g": 0, "e": 1}[which]
    proj = np.zeros((2, 2))
    proj[idx, idx] = 1.0
    return tensor(Operator(proj, (2,)), identity(fock_dim))


def thermal_dm(fock_dim: int, n_th: float, qubit: str | None = "g") -> DensityMatrix:
    """Truncated Bose-Einstein state, renormalized on the kept levels."""
    n = np.arange(fock_dim)
    if n_th == 0:
        p = (n == 0).astype(float)
    else:
        p = (n_th / (1.0 + n_th)) ** n / (1.0 + n_th)
        p = p / p.sum()
    rho = np.diag(p).astype(complex)
    return _with_qubit(rho, fock_dim, qubit)


def coherent_dm(fock_dim: int, alpha: complex, qubit: str | None = "g") -> DensityMatrix:
    """Coherent state from the truncated number-state series, renormalized."""
    n = np.arange(fock_dim)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * alpha ** n
    amps = amps / np.linalg.norm(amps)
    return _with_qubit(np.outer(amps, amps.conj()), fock_dim, qubit)


def _with_qubit(rho_mech, fock_dim, qubit):
    if qubit is None:
        return DensityMatrix(rho_mech, (fock_dim,))
    q = np.zeros((2, 2))
    q[{"g": 0, "e": 1}[qubit], {"g": 0, "e": 1}[qubit]] = 1.0
    return DensityMatrix(np.kron(q, rho_mech), (2, fock_dim))


def ket2dm(psi: StateVector) -> DensityMatrix:
    return psi.to_dm()


@dataclass(frozen=True, eq=False)
class HarmonicOperator:
    """Time-dependent operator ``A(t) = static + sum_k exp(1j w_k t) A_k``.

    Calling the object returns the ``Operator`` at time ``t``.
    """

    static: Operator
    terms: tuple[tuple[float, Operator], ...] = ()

    def __post_init__(self):
        terms = tuple((float(w), op) for w, op in self.terms)
        for _, op in terms:
            self.static._check(op)
        object.__setattr__(self, "terms", terms)

    @property
    def dims(self):
        return self.static.dims

    @property
    def is_static(self) -> bool:
        return not self.terms

    def __call__(self, t: float) -> Operator:
        data = self.static.data.copy()
        for w, op in self.terms:
            data = data + np.exp(1j * w * t) * op.data
        return Operator(data, self.dims)

    def components(self):
        """``[(0.0, static), (w_k, A_k), ...]``."""
        return [(0.0, self.static), *self.terms]

"""Model parameters, Hamiltonians and dissipation channels.

All frequencies and rates are angular (rad/s).  Hz values are converted only
at the boundary, in :meth:`SystemParams.from_hz` and the config reader.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy import constants as const

from .errors import NoResonanceError, ValidityWarning
from .operators import (HarmonicOperator, Operator, destroy, identity, pauli,
                        qubit_projector, tensor)

TWO_PI = 2.0 * np.pi

# Ratio that stands in for ">>" in the validity conditions.
VALIDITY_RATIO = 5.0

FRAMES = ("lab", "drive", "interaction")


@dataclass(frozen=True)
class SystemParams:
    """Frequencies and rates of the driven qubit-resonator model (rad/s).

    ``delta_d`` is the detuning of the mechanical drive from the renormalized
    resonator frequency, ``omega_f = omega0' - delta_d``.
    """

    omega0: float
    g: float
    omega_p_drive: float
    delta: float
    epsilon: float = 0.0
    delta_d: float = 0.0
    gamma: float = 0.0
    gamma_phi: float = 0.0
    kappa: float = 0.0
    n_th: float = 0.0
    fock_dim: int = 10
    omega0_shift: str = "beta"

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        for name in ("gamma", "gamma_phi", "kappa", "n_th", "epsilon", "g", "omega_p_drive"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ValueError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")
        if self.omega0_shift not in ("beta", "literal"):
            raise ValueError("omega0_shift must be 'beta' or 'literal'")
        object.__setattr__(self, "fock_dim", int(self.fock_dim))

    @classmethod
    def from_hz(cls, f0, g, omega_p, epsilon=0.0, delta_d=0.0, gamma=0.0,
                gamma_phi=0.0, kappa=None, Q=None, n_th=0.0, fock_dim=10,
                delta=None, omega0_shift="beta") -> SystemParams:
        """Build from cycle frequencies (Hz).

        ``kappa`` may be replaced by a quality factor ``Q`` (``kappa = omega0/Q``).
        ``delta=None`` selects the resonant qubit detuning.
        """
        if kappa is None:
            kappa = 0.0 if Q is None else f0 / Q
        elif Q is not None:
            raise ValueError("give kappa or Q, not both")
        params = cls(omega0=TWO_PI * f0, g=TWO_PI * g, omega_p_drive=TWO_PI * omega_p,
                     delta=0.0 if delta is None else TWO_PI * delta,
                     epsilon=TWO_PI * epsilon, delta_d=TWO_PI * delta_d,
                     gamma=TWO_PI * gamma, gamma_phi=TWO_PI * gamma_phi,
                     kappa=TWO_PI * kappa, n_th=n_th, fock_dim=fock_dim,
                     omega0_shift=omega0_shift)
        if delta is None:
            params = replace(params, delta=resonant_delta(params))
        return params

    def with_hz(self, **changes) -> SystemParams:
        """Copy with some fields replaced by Hz values (``fock_dim``/``n_th`` as is)."""
        plain = {"n_th", "fock_dim", "omega0_shift"}
        conv = {k: (v if k in plain else TWO_PI * v) for k, v in changes.items()}
        return replace(self, **conv)

    def to_hz(self) -> dict:
        plain = {"n_th", "fock_dim", "omega0_shift"}
        return {f.name: (getattr(self, f.name) if f.name in plain
                         else getattr(self, f.name) / TWO_PI) for f in fields(self)}

    @property
    def omega_f(self) -> float:
        return derive(self).omega0_prime - self.delta_d

    def validity(self) -> dict:
        """Ratios behind the effective-model conditions and whether they hold."""
        d = derive(self)
        big = max(self.g, self.omega_p_drive)
        small = min(self.g, self.omega_p_drive)
        r1 = self.delta / big if big > 0 else math.inf
        r2 = small / self.epsilon if self.epsilon > 0 else math.inf
        return {"delta_over_coupling": r1, "coupling_over_drive": r2, "beta": d.beta,
                "valid": r1 >= VALIDITY_RATIO and r2 >= VALIDITY_RATIO and d.beta < 1}

    def check_validity(self) -> bool:
        v = self.validity()
        if not v["valid"]:
            warnings.warn(
                f"outside the effective-model regime: Delta/max(g, Omega_p) = "
                f"{v['delta_over_coupling']:.3g}, min(g, Omega_p)/epsilon = "
                f"{v['coupling_over_drive']:.3g}, beta = {v['beta']:.3g}",
                ValidityWarning, stacklevel=2)
        return v["valid"]


def reference_params(**overrides_hz) -> SystemParams:
    """Reference working point: 1 GHz resonator, Q = 5e3, g = 80 MHz,
    Omega_p = 100 MHz, Gamma = 1 MHz, epsilon = 0.2 MHz, resonant qubit.

    Keyword overrides use the names of :meth:`SystemParams.from_hz`.
    """
    base = dict(f0=1e9, g=80e6, omega_p=100e6, epsilon=0.2e6, delta_d=0.0,
                gamma=1e6, gamma_phi=0.0, Q=5e3, n_th=0.0, fock_dim=10)
    if "kappa" in overrides_hz:
        base.pop("Q")
    base.update(overrides_hz)
    return SystemParams.from_hz(**base)


@dataclass(frozen=True)
class DerivedParams:
    lambda_eff: float
    delta_tilde: float
    omega0_prime: float
    theta: float
    beta: float


def derive(params: SystemParams) -> DerivedParams:
    """Effective two-phonon coupling, dressed splitting and frequency shift.

    ``lambda = 2 Omega_p g^2 / omega0^2``, ``Delta~ = sqrt(Delta^2/4 + Omega_p^2)``,
    ``theta = atan(2 Omega_p / Delta)``, ``beta = g / omega0``.  The resonator
    shift is ``4 Omega_p^2 beta^2 / (3 omega0)`` by default (``omega0_shift="beta"``),
    which reproduces the exact one-phonon transition of the full Hamiltonian;
    ``"literal"`` uses ``4 Omega_p^2 lambda^2 / (3 omega0^3)`` instead.
    """
    w0, g, op = params.omega0, params.g, params.omega_p_drive
    if not w0 > 0:
        raise ValueError("omega0 must be positive")
    lam = 2.0 * op * g ** 2 / w0 ** 2
    beta = g / w0
    if params.omega0_shift == "literal":
        shift = 4.0 * op ** 2 * lam ** 2 / (3.0 * w0 ** 3)
    else:
        shift = 4.0 * op ** 2 * beta ** 2 / (3.0 * w0)
    return DerivedParams(
        lambda_eff=lam,
        delta_tilde=math.sqrt(params.delta ** 2 / 4.0 + op ** 2),
        omega0_prime=w0 - shift,
        theta=math.atan2(2.0 * op, params.delta) if params.delta >= 0 else math.atan(2.0 * op / params.delta),
        beta=beta,
    )


def resonant_delta(params: SystemParams) -> float:
    """Qubit detuning for which the dressed splitting ``Delta~`` equals ``omega0'``."""
    w0p = derive(params).omega0_prime
    op = params.omega_p_drive
    if w0p <= op:
        raise NoResonanceError(f"omega0' = {w0p:.6g} rad/s does not exceed Omega_p = {op:.6g} rad/s")
    return 2.0 * math.sqrt(w0p ** 2 - op ** 2)


# -- device geometry ----------------------------------------------------------

@dataclass(frozen=True)
class DeviceGeometry:
    """Circuit and resonator quantities in SI units.

    ``X0`` is the zero-point amplitude; see :func:`zero_point_amplitude`.
    """

    E_c: float
    E_J: float
    C0: float
    V0: float
    d: float
    X0: float
    B0: float
    I0: float
    L: float
    mutual_inductance: float
    I_p: float
    n_g: float = 0.5
    flux_quantum: float = const.h / (2 * const.e)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("V0", "I0", "I_p", "B0"):
                if v < 0:
                    raise ValueError(f"{f.name} must be non-negative")
            elif f.name != "n_g" and not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")

    @property
    def near_degeneracy(self) -> bool:
        """Operating near the charge degeneracy point ``n_g = 1/2``."""
        return abs(self.n_g - 0.5) < 0.05


def zero_point_amplitude(mass: float, omega0: float) -> float:
    return math.sqrt(const.hbar / (2.0 * mass * omega0))


def coupling_from_geometry(dev: DeviceGeometry) -> float:
    """``g = 2 E_c C0 V0 X0 / (e d hbar)``."""
    if not dev.d > 0:
        raise ValueError("gap d must be positive")
    return 2.0 * dev.E_c * dev.C0 * dev.V0 * dev.X0 / (const.e * dev.d * const.hbar)


def drive_from_lorentz(dev: DeviceGeometry) -> float:
    """``epsilon = B0 I0 L X0 / hbar``."""
    return dev.B0 * dev.I0 * dev.L * dev.X0 / const.hbar


def rabi_from_line(dev: DeviceGeometry) -> float:
    """``Omega_p = pi E_J M I_p / (hbar Phi0)``."""
    return math.pi * dev.E_J * dev.mutual_inductance * dev.I_p / (const.hbar * dev.flux_quantum)


def thermal_occupation(omega0: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode at ``omega0`` (rad/s) and ``T`` (K)."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(const.hbar * omega0 / (const.k * temperature))


# -- operators ----------------------------------------------------------------

@dataclass(frozen=True)
class Ops:
    """Standard operators on ``qubit x Fock(M)``."""

    fock_dim: int
    b: Operator = field(init=False)
    bd: Operator = field(init=False)
    n: Operator = field(init=False)
    sz: Operator = field(init=False)
    sx: Operator = field(init=False)
    sp: Operator = field(init=False)
    sm: Operator = field(init=False)
    pe: Operator = field(init=False)
    eye: Operator = field(init=False)

    def __post_init__(self):
        M = self.fock_dim
        i2, im = identity(2), identity(M)
        b = tensor(i2, destroy(M))
        set_ = object.__setattr__
        set_(self, "b", b)
        set_(self, "bd", b.dag)
        set_(self, "n", b.dag @ b)
        set_(self, "sz", tensor(pauli("z"), im))
        set_(self, "sx", tensor(pauli("x"), im))
        set_(self, "sp", tensor(pauli("plus"), im))
        set_(self, "sm", tensor(pauli("minus"), im))
        set_(self, "pe", qubit_projector("e", M))
        set_(self, "eye", identity((2, M)))


def operators(fock_dim: int) -> Ops:
    return Ops(fock_dim)


def lab_hamiltonian(params: SystemParams, frame: str = "lab") -> HarmonicOperator:
    """Full driven Hamiltonian as a harmonic time-dependent operator.

    ``frame="lab"``:
        ``(Delta/2) sz + w0 n + g sz (b+ + b) + Omega_p sx
        + eps (b+ exp(-i wf t) + b exp(i wf t))``.
    ``frame="drive"``: resonator rotating at ``wf``; the drive is static and
        the coupling term carries ``exp(+-i wf t)``.  Periodic with ``2 pi / wf``.
    ``frame="interaction"``: interaction picture of ``w0 n + (Delta/2) sz``.

    The frames differ by unitaries diagonal in the product basis, so
    populations (and every observable built from them) agree.
    """
    o = operators(params.fock_dim)
    w0, g, op, eps = params.omega0, params.g, params.omega_p_drive, params.epsilon
    wf = params.omega_f
    half_delta = 0.5 * params.delta
    if frame == "lab":
        static = half_delta * o.sz + w0 * o.n + g * (o.sz @ (o.bd + o.b)) + op * o.sx
        terms = [(-wf, eps * o.bd), (wf, eps * o.b)] if eps else []
    elif frame == "drive":
        static = half_delta * o.sz + (w0 - wf) * o.n + op * o.sx + eps * (o.bd + o.b)
        terms = [(wf, g * (o.sz @ o.bd)), (-wf, g * (o.sz @ o.b))]
    elif frame == "interaction":
        static = 0.0 * o.eye
        terms = [(w0, g * (o.sz @ o.bd)), (-w0, g * (o.sz @ o.b)),
                 (params.delta, op * o.sp), (-params.delta, op * o.sm)]
        if eps:
            terms += [(w0 - wf, eps * o.bd), (wf - w0, eps * o.b)]
    else:
        raise ValueError(f"unknown frame {frame!r}; choose from {FRAMES}")
    terms = [(w, t) for w, t in terms if np.any(t.data)]
    return HarmonicOperator(static, tuple(terms))


def frame_phases(params: SystemParams, frame: str, t: float) -> np.ndarray:
    """Diagonal of ``U`` with ``psi_lab(t) = U(t) psi_frame(t)``."""
    M = params.fock_dim
    n = np.tile(np.arange(M), 2)
    sz = np.repeat([-1.0, 1.0], M)
    if frame == "lab":
        return np.ones(2 * M, dtype=complex)
    if frame == "drive":
        return np.exp(-1j * params.omega_f * t * n)
    if frame == "interaction":
        return np.exp(-1j * t * (params.omega0 * n + 0.5 * params.delta * sz))
    raise ValueError(f"unknown frame {frame!r}")


def effective_hamiltonian(params: SystemParams) -> Operator:
    """Static effective Hamiltonian in the frame co-rotating with the drive.

    The resonator rotates at ``wf`` and the dressed qubit at ``2 wf``:
    ``(w0' - wf) n + 2 (Delta~ - wf) |e><e| + lambda (b^2 s+ + b+^2 s-) + eps (b+ + b)``.
    On resonance (``Delta~ = w0'``) the first two terms are
    ``Delta_d (n + 2|e><e|)``.  Qubit operators refer to the dressed basis.
    """
    o = operators(params.fock_dim)
    d = derive(params)
    wf = d.omega0_prime - params.delta_d
    lam = d.lambda_eff
    b2 = o.b @ o.b
    h = ((d.omega0_prime - wf) * o.n + 2.0 * (d.delta_tilde - wf) * o.pe
         + lam * (b2 @ o.sp + b2.dag @ o.sm) + params.epsilon * (o.bd + o.b))
    return h


def nonhermitian_hamiltonian(params: SystemParams) -> Operator:
    """``H_eff - i (kappa/2) n - i (Gamma/2) |e><e|``."""
    o = operators(params.fock_dim)
    return (effective_hamiltonian(params) - 0.5j * params.kappa * o.n
            - 0.5j * params.gamma * o.pe)


def collapse_operators(params: SystemParams) -> list[tuple[Operator, float]]:
    """Dissipation channels ``(A, rate)`` for ``D[A, rate]``.

    Qubit decay ``(s-, Gamma)``, dephasing ``(sz, Gamma_phi/2)``, thermal
    absorption ``(b+, kappa n_th)`` and emission ``(b, kappa (n_th + 1))``.
    """
    o = operators(params.fock_dim)
    chans = [(o.sm, params.gamma), (o.sz, 0.5 * params.gamma_phi),
             (o.bd, params.kappa * params.n_th), (o.b, params.kappa * (params.n_th + 1.0))]
    for _, rate in chans:
        if rate < 0:
            raise ValueError(f"negative dissipation rate {rate}")
    return chans

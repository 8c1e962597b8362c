"""Closed-form weak-drive theory on the four states ``|g,0>, |g,1>, |g,2>, |e,0>``.

Rates and couplings are angular frequencies; any common unit works because
every result here is homogeneous of degree zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BLOCKADE_RATIO = 5.0


@dataclass(frozen=True)
class AnalyticAmplitudes:
    """Steady-state amplitudes on the four-state subspace."""

    c0g: complex
    c1g: complex
    c2g: complex
    c0e: complex

    @property
    def populations(self) -> dict:
        return {k: abs(getattr(self, k)) ** 2 for k in ("c0g", "c1g", "c2g", "c0e")}

    @property
    def two_phonon_small(self) -> bool:
        """Whether ``|c2g|^2`` is well below the one- and zero-phonon weights."""
        p = self.populations
        return p["c2g"] < 0.1 * min(p["c0g"], p["c1g"]) if p["c1g"] > 0 else True


def _check(epsilon, kappa, gamma, lam):
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    for name, v in (("kappa", kappa), ("gamma", gamma), ("lambda", lam)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


def _two_phonon_rate(kappa, gamma, lam):
    return 2.0 * kappa + 4.0 * lam ** 2 / gamma


def steady_amplitudes(epsilon, kappa, gamma, lam) -> AnalyticAmplitudes:
    """Weak-drive amplitudes with ``c1g`` real and positive.

    ``|c1g|^2 = 4 eps^2 / (8 eps^2 + kappa^2)``,
    ``c2g = sqrt(2) eps c1g / (i (2 kappa + 4 lambda^2 / Gamma))``,
    ``c0e = 2 sqrt(2) lambda c2g / (i Gamma)``, and
    ``c0g = i kappa / sqrt(8 eps^2 + kappa^2)``, which carries the phase set by
    ``c1g`` real and fixes ``|c0g|^2 + |c1g|^2`` to ``(4 eps^2 + kappa^2) /
    (8 eps^2 + kappa^2)``.
    """
    _check(epsilon, kappa, gamma, lam)
    denom = 8.0 * epsilon ** 2 + kappa ** 2
    c1g = 2.0 * epsilon / math.sqrt(denom)
    c2g = math.sqrt(2.0) * epsilon * c1g / (1j * _two_phonon_rate(kappa, gamma, lam))
    c0e = 2.0 * math.sqrt(2.0) * lam / (1j * gamma) * c2g
    c0g = 1j * kappa / math.sqrt(denom)
    return AnalyticAmplitudes(c0g=c0g, c1g=complex(c1g), c2g=c2g, c0e=c0e)


def g2_analytic(epsilon, kappa, gamma, lam) -> float:
    """``g2(0) = (8 eps^2 + kappa^2) / (2 kappa + 4 lambda^2 / Gamma)^2``."""
    _check(epsilon, kappa, gamma, lam)
    return (8.0 * epsilon ** 2 + kappa ** 2) / _two_phonon_rate(kappa, gamma, lam) ** 2


@dataclass(frozen=True)
class BlockadeDiagnostic:
    two_phonon_shift: float  # 4 lambda^2 / Gamma
    competitor: float        # max(2 sqrt(2) eps, kappa)
    ratio: float
    strong: bool


def blockade_condition(epsilon, kappa, gamma, lam, threshold=BLOCKADE_RATIO) -> BlockadeDiagnostic:
    """Compare ``4 lambda^2 / Gamma`` with ``max(2 sqrt(2) eps, kappa)``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    shift = 4.0 * lam ** 2 / gamma
    comp = max(2.0 * math.sqrt(2.0) * epsilon, kappa)
    ratio = shift / comp if comp > 0 else math.inf
    return BlockadeDiagnostic(shift, comp, ratio, ratio >= threshold)


@dataclass(frozen=True)
class OracleResult:
    amplitudes: AnalyticAmplitudes
    g2: float
    condition_number: float


def four_state_oracle(epsilon, kappa, gamma, lam) -> OracleResult:
    """Exact stationary solution of the non-Hermitian four-state equations.

    With ``c0g = 1`` the remaining amplitudes solve

        -i kappa/2 c1g + sqrt2 eps c2g              = -eps
        sqrt2 eps c1g - i kappa c2g + sqrt2 lam c0e = 0
        sqrt2 lam c2g - i Gamma/2 c0e               = 0

    and the vector is normalized and rotated so that ``c1g`` is real positive.
    ``g2 = 2 |c2g|^2 / |c1g|^4`` (``nan`` for ``eps = 0``).
    """
    _check(epsilon, kappa, gamma, lam)
    s2 = math.sqrt(2.0)
    A = np.array([[-0.5j * kappa, s2 * epsilon, 0.0],
                  [s2 * epsilon, -1j * kappa, s2 * lam],
                  [0.0, s2 * lam, -0.5j * gamma]], dtype=complex)
    rhs = np.array([-epsilon, 0.0, 0.0], dtype=complex)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"four-state system is singular (cond ~ {cond:.3g})")
    c1g, c2g, c0e = np.linalg.solve(A, rhs)
    v = np.array([1.0, c1g, c2g, c0e])
    v = v / np.linalg.norm(v)
    if abs(v[1]) > 0:
        v = v * abs(v[1]) / v[1]
    amps = AnalyticAmplitudes(c0g=complex(v[0]), c1g=complex(v[1]), c2g=complex(v[2]),
                              c0e=complex(v[3]))
    p1 = abs(v[1]) ** 2
    g2 = 2.0 * abs(v[2]) ** 2 / p1 ** 2 if p1 > 0 else float("nan")
    return OracleResult(amps, g2, cond)


def detection_ratio_weak_drive(gamma, lam) -> float:
    """``P_e / P_2 = |c0e|^2 / |c2g|^2 = 8 lambda^2 / Gamma^2``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return 8.0 * lam ** 2 / gamma ** 2

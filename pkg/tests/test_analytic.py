import math

import numpy as np
import pytest

from phonon_blockade.analytic import (blockade_condition, four_state_oracle, g2_analytic,
                                      steady_amplitudes)

MHZ = 2 * math.pi * 1e6
REF = (0.2 * MHZ, 0.2 * MHZ, 1.0 * MHZ, 1.28 * MHZ)  # epsilon, kappa, Gamma, lambda


def test_reference_g2():
    assert g2_analytic(*REF) == pytest.approx(7.45e-3, abs=1e-4)
    assert g2_analytic(*REF) == pytest.approx(0.36 / (0.4 + 6.5536) ** 2, rel=1e-12)


def test_reference_amplitudes_follow_closed_forms():
    # 4 eps^2 / (8 eps^2 + kappa^2) = 0.16 / 0.36 and
    # 8 eps^4 / [(2 kappa + 4 lambda^2 / Gamma)^2 (8 eps^2 + kappa^2)] = 0.0128 / 17.41
    pop = steady_amplitudes(*REF).populations
    assert pop["c1g"] == pytest.approx(0.16 / 0.36, rel=1e-12)
    assert pop["c2g"] == pytest.approx(0.0128 / (0.36 * 6.9536 ** 2), rel=1e-12)


def test_undriven_amplitudes():
    a = steady_amplitudes(0.0, *REF[1:])
    assert a.c1g == 0 and a.c2g == 0 and a.c0e == 0 and abs(a.c0g) == 1


def test_strong_drive_saturation():
    a = steady_amplitudes(1e3 * MHZ, *REF[1:])
    assert a.populations["c1g"] == pytest.approx(0.5, rel=1e-6)


def test_phase_conventions():
    eps, kappa, gamma, lam = REF
    a = steady_amplitudes(*REF)
    assert a.c1g.imag == 0 and a.c1g.real > 0
    assert a.c0e == pytest.approx(2 * math.sqrt(2) * lam / (1j * gamma) * a.c2g, rel=1e-14)
    assert a.two_phonon_small


def test_g2_identity_with_amplitudes():
    rng = np.random.default_rng(0)
    for _ in range(20):
        eps, kappa, gamma, lam = rng.uniform(0.05, 3, 4)
        pop = steady_amplitudes(eps, kappa, gamma, lam).populations
        assert 2 * pop["c2g"] / pop["c1g"] ** 2 == pytest.approx(
            g2_analytic(eps, kappa, gamma, lam), rel=1e-12)


def test_weak_coupling_limit():
    assert g2_analytic(1e-9, 1.0, 1.0, 1e-9) == pytest.approx(0.25, rel=1e-9)
    assert not blockade_condition(1e-9, 1.0, 1.0, 1e-9).strong


def test_scale_invariance():
    s = 17.3
    assert g2_analytic(*(s * x for x in REF)) == pytest.approx(g2_analytic(*REF), rel=1e-12)


def test_monotonicity():
    eps, kappa, gamma, lam = REF
    lams = np.linspace(0.5, 3, 6) * MHZ
    gammas = np.linspace(0.5, 6, 6) * MHZ
    epss = np.linspace(0.05, 1, 6) * MHZ
    assert np.all(np.diff([g2_analytic(eps, kappa, gamma, x) for x in lams]) < 0)
    assert np.all(np.diff([g2_analytic(eps, kappa, x, lam) for x in gammas]) > 0)
    assert np.all(np.diff([g2_analytic(x, kappa, gamma, lam) for x in epss]) > 0)


def test_input_validation():
    with pytest.raises(ValueError):
        g2_analytic(0.1, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        steady_amplitudes(-0.1, 1.0, 1.0, 1.0)


def test_blockade_examples():
    d = blockade_condition(*REF)
    assert d.two_phonon_shift / MHZ == pytest.approx(6.5536, rel=1e-12)
    assert d.ratio == pytest.approx(11.6, abs=0.05)
    assert d.strong
    assert blockade_condition(0.2 * MHZ, 0.2 * MHZ, 1 * MHZ, 0.0).ratio == 0
    fragile = blockade_condition(0.2 * MHZ, 0.2 * MHZ, 3 * MHZ, 0.64 * MHZ)
    assert fragile.two_phonon_shift / MHZ == pytest.approx(0.546, abs=1e-3)
    assert fragile.ratio == pytest.approx(0.966, abs=0.01)
    assert not fragile.strong


def test_oracle_solves_its_equations():
    eps, kappa, gamma, lam = REF
    res = four_state_oracle(*REF)
    a = res.amplitudes
    c0, c1, c2, ce = (a.c0g, a.c1g, a.c2g, a.c0e)
    s2 = math.sqrt(2)
    assert abs(eps * c0 - 0.5j * kappa * c1 + s2 * eps * c2) < 1e-12 * MHZ
    assert abs(s2 * eps * c1 - 1j * kappa * c2 + s2 * lam * ce) < 1e-12 * MHZ
    assert abs(s2 * lam * c2 - 0.5j * gamma * ce) < 1e-12 * MHZ
    assert sum(a.populations.values()) == pytest.approx(1.0, abs=1e-14)
    assert a.c1g.imag == 0 and a.c1g.real > 0
    assert res.g2 == pytest.approx(2 * abs(c2) ** 2 / abs(c1) ** 4, rel=1e-14)
    # |c0e / c2g|^2 = 8 lambda^2 / Gamma^2 holds exactly in the subspace
    assert abs(ce / c2) ** 2 == pytest.approx(8 * lam ** 2 / gamma ** 2, rel=1e-12)


def test_oracle_undriven_ground_state():
    res = four_state_oracle(0.0, *REF[1:])
    assert abs(res.amplitudes.c0g) == pytest.approx(1.0)
    assert math.isnan(res.g2)

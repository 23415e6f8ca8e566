import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhqfi.noise import (
    NoiseParams,
    eta_cap,
    gamma_eff,
    gamma_eff_nonmarkov,
    qfi_decay,
    stability_detuning,
)

rates = st.floats(0.0, 5.0)


def test_gamma_eff_fixtures():
    assert gamma_eff(NoiseParams(gamma_phi=1.0, gamma_minus=2.0), 0.3, 1.0) == 2.0
    assert gamma_eff(NoiseParams(gamma_pt=1.0), 0.5, 1.0) == pytest.approx(1.0)
    got = gamma_eff(NoiseParams(gamma_phi=0.05, gamma_minus=0.01, gamma_pt=0.1), 0.25, 1.0)
    assert got == pytest.approx(0.105)


@settings(max_examples=50, deadline=None)
@given(a=rates, b=rates, c=rates, d=st.floats(0.0, 1.0))
def test_gamma_eff_monotone(a, b, c, d):
    base = gamma_eff(NoiseParams(gamma_phi=a, gamma_minus=b, gamma_pt=c), d, 1.0)
    assert gamma_eff(NoiseParams(gamma_phi=a + 1, gamma_minus=b, gamma_pt=c), d, 1.0) >= base
    assert gamma_eff(NoiseParams(gamma_phi=a, gamma_minus=b + 1, gamma_pt=c), d, 1.0) >= base
    assert gamma_eff(NoiseParams(gamma_phi=a, gamma_minus=b, gamma_pt=c + 1), d, 1.0) >= base


class TestQfiDecay:
    def test_t0(self):
        np_ = NoiseParams(gamma_phi=0.3, gamma_pt=0.2)
        assert qfi_decay(2.5, np_, 0.3, 1.0, 0.0).value == 2.5

    def test_pure_decay(self):
        np_ = NoiseParams(gamma_phi=0.7)
        out = qfi_decay(1.0, np_, 0.3, 1.0, 2.0)
        assert out.value == pytest.approx(math.exp(-1.4))

    def test_fixture(self):
        np_ = NoiseParams(gamma_phi=0.5, gamma_pt=0.5)
        out = qfi_decay(1.0, np_, 0.5, 1.0, 1.0)  # Gamma_eff = 1, gamma_pt = 0.5
        expected = math.exp(-1) * (1 + 0.5 * (1 - math.exp(-1)))
        assert out.value == pytest.approx(expected, rel=1e-12)
        assert out.value == pytest.approx(0.4842, abs=1e-4)

    def test_continuity_at_zero_rate(self):
        # gamma_pt > 0 but sin^2 term off: compare the exact limit form with
        # a series evaluation at tiny Gamma
        np_tiny = NoiseParams(gamma_phi=1e-9, gamma_pt=0.4)
        np_zero = NoiseParams(gamma_pt=0.4)
        t = 3.0
        a = qfi_decay(1.0, np_tiny, 0.0, 1.0, t).value  # sin(0) = 0
        b = qfi_decay(1.0, np_zero, 0.0, 1.0, t).value
        assert a == pytest.approx(b, abs=1e-8)

    def test_bracket_bound(self):
        np_ = NoiseParams(gamma_phi=0.2, gamma_pt=0.3)
        G = gamma_eff(np_, 0.4, 1.0)
        bound = 1.0 * (1 + np_.gamma_pt / G)
        for t in (0.0, 0.5, 2.0, 10.0):
            assert qfi_decay(1.0, np_, 0.4, 1.0, t).value <= bound + 1e-12


def test_nonmarkov():
    assert gamma_eff_nonmarkov(1.0, 0.0, 1.0) == 1.0
    assert gamma_eff_nonmarkov(1.0, 0.1, 1.0) == pytest.approx(1.1)
    assert gamma_eff_nonmarkov(1.0, 0.2, 1.0) == pytest.approx(1.2)  # the 20% ceiling
    with pytest.raises(ValueError):
        gamma_eff_nonmarkov(1.0, 0.1, 0.0)


def test_stability_detuning():
    assert stability_detuning(0.0, 1.0) == 0.0
    assert stability_detuning(1e-4, 1.0) == pytest.approx(0.01)
    assert stability_detuning(4e-4, 1.0) == pytest.approx(2 * stability_detuning(1e-4, 1.0))


class TestEtaCap:
    def test_paper_fixture(self):
        t2 = 2 * math.pi * 1e7 * 1e-4  # T2* = 100 us at t/2pi = 10 MHz
        cap = eta_cap(t=1.0, n=50, gamma_eff_nm=1e-3, eps_sys=0.01, t2=t2)
        assert cap["raw"] == pytest.approx(8333.33, abs=0.01)
        assert cap["active_branch"] == "t2"
        assert cap["eta"] == pytest.approx(t2 / 6.0)
        assert 900 < cap["eta"] < 1100  # the published "~1000"

    def test_uncapped_limit(self):
        cap = eta_cap(t=1.0, n=50, gamma_eff_nm=1e-3, eps_sys=0.0)
        assert cap["eta"] == pytest.approx(cap["raw"])
        assert cap["active_branch"] == "noise"

    def test_cap_never_exceeds_raw(self):
        for t2 in (10.0, 1e4, float("inf")):
            cap = eta_cap(t=1.0, n=30, gamma_eff_nm=2e-3, eps_sys=0.3, t2=t2)
            assert cap["eta"] <= cap["raw"] + 1e-12


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(gamma_phi=-0.1)

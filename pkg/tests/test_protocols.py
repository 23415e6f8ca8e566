import numpy as np
import pytest

from nhqfi.model import ChainSpec
from nhqfi.protocols import (
    ResourceParams,
    adiabatic_gap_scan,
    braid,
    minimum_real_gap,
    quench_survival,
    resource_energy,
    resource_time,
)
from nhqfi.ptphase import gc_exact, gc_first_breaking

SPEC10 = ChainSpec(n=10, t=1.0, g=0.1, kind="pt")


class TestQuench:
    def test_no_quench_survival_is_one(self):
        times = np.linspace(0, 10, 100)
        q = quench_survival(SPEC10, 0.1, 0.1, times)
        assert np.max(np.abs(q.survival - 1.0)) < 1e-10
        assert q.gamma_fit < 1e-6

    def test_below_threshold_no_net_decay(self):
        n = 10
        gc1 = gc_first_breaking(n)
        times = np.linspace(0, 30, 400)
        q = quench_survival(SPEC10, 0.3 * gc1, 0.6 * gc1, times)
        assert q.gamma_fit <= 1e-3

    def test_omega_tracks_pair_beat(self):
        n = 10
        gc = gc_exact(n)
        eps = 0.1
        gf = gc - eps
        times = np.linspace(0, 14, 700)
        q = quench_survival(SPEC10, gc - 5e-4, gf, times,
                            omega_guess=1.1 * np.sqrt(gc**2 - gf**2))
        assert q.omega_fit == pytest.approx(np.sqrt(gc**2 - gf**2), rel=0.05)

    def test_omega_exponent_half(self):
        n = 10
        gc = gc_exact(n)
        eps_grid = np.geomspace(0.05, 0.3, 4)
        times = np.linspace(0, 14, 700)
        oms = []
        for eps in eps_grid:
            gf = gc - eps
            q = quench_survival(SPEC10, gc - 5e-4, gf, times,
                                omega_guess=1.1 * np.sqrt(gc**2 - gf**2))
            oms.append(q.omega_fit)
        slope = np.polyfit(np.log(eps_grid), np.log(oms), 1)[0]
        assert abs(slope - 0.5) < 0.1


class TestGapScan:
    def test_gap_at_zero_gain_is_edge_spacing(self):
        n = 10
        k = np.arange(1, n + 1) * np.pi / (n + 1)
        edge_gap = 2 * (np.cos(k[0]) - np.cos(k[1]))
        assert minimum_real_gap(SPEC10, 0.0) == pytest.approx(edge_gap, rel=1e-10)

    def test_monotone_decrease_near_gc(self):
        gc = gc_exact(10)
        gs = gc - np.geomspace(1e-4, 1e-2, 6)[::-1]
        gaps = [minimum_real_gap(SPEC10, g) for g in gs]
        assert all(np.diff(gaps) < 0)

    def test_exponent(self):
        gc = gc_exact(10)
        out = adiabatic_gap_scan(SPEC10, gc - np.geomspace(1e-5, 1e-2, 10))
        assert abs(out["exponent"] - 0.5) < 0.02


class TestBraid:
    def test_monodromy_swap_and_restore(self):
        spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
        one = braid(spec, eps=1e-2, period=10.0, steps=512)
        assert one.swapped
        two = braid(spec, eps=1e-2, period=10.0, steps=512, loops=2)
        assert not two.swapped

    def test_no_enclosure_no_swap(self):
        spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
        off = braid(spec, eps=1e-2, period=10.0, steps=512, enclose=False)
        assert not off.swapped

    def test_berry_phase_step_stability(self):
        spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
        a = braid(spec, eps=1e-2, period=10.0, steps=512)
        b = braid(spec, eps=1e-2, period=10.0, steps=1024)
        assert abs(a.berry_phase - b.berry_phase) < 1e-4

    def test_small_radius_monodromy(self):
        for eps in (1e-3, 1e-2):
            for n in (2, 10):
                spec = ChainSpec(n=n, t=1.0, g=0.5, kind="pt")
                assert braid(spec, eps=eps, period=10.0, steps=400).swapped

    def test_adiabatic_criterion(self):
        spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
        eps = 1e-2
        slow = braid(spec, eps=eps, period=100.0, steps=128)
        assert slow.adiabatic_ok
        fast = braid(spec, eps=eps, period=np.pi * np.sqrt(2 * eps) / 2, steps=128)
        assert not fast.adiabatic_ok

    def test_input_validation(self):
        spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
        with pytest.raises(ValueError):
            braid(spec, eps=1e-2, period=10.0, steps=50)
        with pytest.raises(ValueError):
            braid(spec, eps=-1.0, period=10.0)


class TestResources:
    def test_time_fixture(self):
        p = ResourceParams(t=1.0, delta=1e-3, nu=1, n=50, t_read=1.0)
        out = resource_time(p)
        assert out["prep"] == pytest.approx(10.0)
        assert out["ramp"] == pytest.approx(1000.0)
        assert out["interrogation"] == pytest.approx(6.32e-4, rel=1e-2)
        assert out["readout"] == pytest.approx(50.0)
        assert out["total"] == pytest.approx(1060.0, abs=0.1)

    def test_large_detuning_limit(self):
        p = ResourceParams(t=1.0, delta=1e9, nu=1, n=20, t_read=2.0)
        out = resource_time(p)
        assert out["total"] == pytest.approx(10.0 + 20 / 2.0, rel=1e-4)

    def test_nu_scaling(self):
        p1 = ResourceParams(t=1.0, delta=1e-3, nu=1, n=50, t_read=1.0)
        p2 = ResourceParams(t=1.0, delta=1e-3, nu=2, n=50, t_read=1.0)
        r1, r2 = resource_time(p1), resource_time(p2)
        assert r2["interrogation"] == pytest.approx(np.sqrt(2) * r1["interrogation"])
        assert r2["prep"] == r1["prep"] and r2["ramp"] == r1["ramp"]

    def test_monotonicity(self):
        base = dict(t=1.0, nu=1, t_read=1.0)
        t_small = resource_time(ResourceParams(delta=1e-3, n=50, **base))["total"]
        t_big_delta = resource_time(ResourceParams(delta=1e-2, n=50, **base))["total"]
        t_big_n = resource_time(ResourceParams(delta=1e-3, n=80, **base))["total"]
        assert t_big_delta < t_small < t_big_n

    def test_energy_fixture(self):
        p = ResourceParams(t=1.0, delta=1e-3, nu=1, n=50, t_read=1.0, g=0.1)
        assert resource_energy(p, t_total=1060.0) == pytest.approx(630.0)

    def test_energy_initialization_only(self):
        p = ResourceParams(t=1.0, delta=1e-3, nu=1, n=50, t_read=1e12, g=0.0)
        assert resource_energy(p) == pytest.approx(50.0, rel=1e-9)

    def test_energy_linear_in_n(self):
        p1 = ResourceParams(t=1.0, delta=1e-3, nu=1, n=10, t_read=1.0, g=0.1)
        p2 = ResourceParams(t=1.0, delta=1e-3, nu=1, n=20, t_read=1.0, g=0.1)
        assert resource_energy(p2, 100.0) == pytest.approx(2 * resource_energy(p1, 100.0))

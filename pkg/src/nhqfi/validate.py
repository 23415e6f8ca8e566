"""The acceptance suite: one callable per criterion, a runner and a report.

Each criterion returns a :class:`CriterionResult` whose checks carry the
measured value, the expected value and the tolerance.  Checks that are
known to be unattainable as printed (they inherit defects of the source
claims; see the repository notes) are marked ``expected_failure`` -- they
are executed and reported honestly, never weakened.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .model import ChainSpec
from . import bench as bench_mod
from . import figures, multiparam, noise, protocols, ptphase, qfi, spectral


@dataclass
class Check:
    name: str
    measured: float
    expected: float
    tol: float
    passed: bool
    expected_failure: bool = False
    note: str = ""


@dataclass
class CriterionResult:
    cid: int
    title: str
    checks: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def passed_modulo_known(self) -> bool:
        return all(c.passed or c.expected_failure for c in self.checks)

    def add(self, name, measured, expected, tol, expected_failure=False, note=""):
        ok = abs(measured - expected) <= tol
        self.checks.append(
            Check(name=name, measured=float(measured), expected=float(expected),
                  tol=float(tol), passed=bool(ok),
                  expected_failure=expected_failure, note=note)
        )
        return ok

    def add_bool(self, name, ok, note="", expected_failure=False):
        self.checks.append(
            Check(name=name, measured=float(bool(ok)), expected=1.0, tol=0.0,
                  passed=bool(ok), expected_failure=expected_failure, note=note)
        )
        return ok


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = _time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime_seconds = _time.perf_counter() - t0
        return res
    return wrapper


# -- criterion 1: PT threshold --------------------------------------------------


@_timed
def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "PT threshold: bisected g_c equals 2t cos(pi/(N+1))")
    for n in (2, 4, 8, 10, 16, 32, 64):
        gc_num = ptphase.gc_numeric(n, 1.0, width=1e-9)
        res.add(f"gc_numeric_n{n}", gc_num, ptphase.gc_exact(n), 1e-6)
    res.add(
        "printed_fixture_n10",
        ptphase.gc_exact(10),
        1.98989,
        1e-3,
        expected_failure=True,
        note="2 cos(pi/11) = 1.9189859...; the printed 19.9 MHz fixture "
             "does not satisfy the formula it is quoted next to",
    )
    return res


# -- criterion 2: EP square-root law --------------------------------------------


@_timed
def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "EP square-root law: splitting and bandwidth exponents")
    for n in (2, 10):
        fit = ptphase.splitting_fit(n, 1.0)
        res.add(f"splitting_exponent_n{n}", fit.exponent, 0.5, 0.02)
        res.add_bool(f"splitting_fit_r2_n{n}", fit.r_squared > 0.99)
    n = 10
    gc = ptphase.gc_exact(n)
    gs = gc * np.linspace(0.9, 0.999, 12)
    bw = [ptphase.coalescing_pair_gap(n, 1.0, g) for g in gs]
    co = np.polyfit(np.log(gc - gs), np.log(bw), 1)
    res.add("bandwidth_exponent_n10", co[0], 0.5, 0.02)
    return res


# -- criterion 3: route equivalence ----------------------------------------------


def _equivalence_specs():
    specs = []
    for n in (4, 6, 8, 10, 12):
        specs.append((ChainSpec(n=n, t=1.0, delta=0.3, mu=0.2, kind="hermitian"), "mu"))
        specs.append((ChainSpec(n=n, t=1.0, delta=0.2, mu=0.4, kind="hermitian"), "delta"))
    for n in (4, 6, 8, 10, 12):
        gc1 = ptphase.gc_first_breaking(n)
        for frac in (0.3, 0.6):
            specs.append((ChainSpec(n=n, t=1.0, g=frac * gc1, kind="pt"), "g"))
    return specs


@_timed
def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "QFI route equivalence and Hermitian reduction")
    worst = 0.0
    for spec, par in _equivalence_specs():
        f_fd = qfi.qfi_finite_diff(spec, par).value
        f_ps = qfi.qfi_pert_sum(spec, par).value
        rel = abs(f_fd - f_ps) / max(abs(f_ps), 1e-300)
        worst = max(worst, rel)
    res.add("max_rel_dev_fd_vs_pert_20_specs", worst, 0.0, 1e-5)
    worst_h = 0.0
    for n in (4, 6, 8):
        spec = ChainSpec(n=n, t=1.0, delta=0.3, mu=0.2, kind="hermitian")
        ref = qfi.qfi_hermitian_standard(spec, "mu").value
        for route in (qfi.qfi_finite_diff, qfi.qfi_pert_sum):
            rel = abs(route(spec, "mu").value - ref) / abs(ref)
            worst_h = max(worst_h, rel)
    res.add("max_rel_dev_vs_hermitian_standard", worst_h, 0.0, 1e-8)
    return res


# -- criterion 4: EP QFI divergence ----------------------------------------------


@_timed
def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "EP QFI divergence: dimer slope and analytic fixtures")
    deltas = np.geomspace(1e-3, 1e-1, 9)
    vals = []
    for d in deltas:
        spec = ChainSpec(n=2, t=1.0, g=1.0 - d, kind="pt")
        vals.append(abs(qfi.qfi_finite_diff(spec, "g", step=1e-3 * d).value))
    slope = float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])
    res.add(
        "dimer_loglog_slope",
        slope,
        -1.0,
        0.05,
        expected_failure=True,
        note="the static biorthogonal eigenstate QFI diverges as delta^-2 "
             "(and is negative); the printed 1/delta law describes the "
             "dynamical phase protocol, a different quantity",
    )
    est = qfi.qfi_ep_analytic(50, 1.0, 1e-3)
    res.add("eta_fixture_n50", est.extras["enhancement"], 8333.3, 0.1)
    gc20 = ptphase.gc_exact(20)
    f1 = qfi.qfi_ep_analytic(20, 1.0, 0.01 * gc20).value
    f20 = qfi.qfi_ep_analytic(20, 1.0, 0.20 * gc20).value
    res.add("margin_1pct_n20", f1, 3371.0, 0.01 * 3371.0)
    res.add("margin_20pct_n20", f20, 169.0, 0.01 * 169.0)
    return res


# -- criterion 5: NHSE suppression ------------------------------------------------


@_timed
def criterion_5() -> CriterionResult:
    res = CriterionResult(5, "NHSE suppression: overlap and QFI decay rates")
    n_list = list(range(20, 81, 10))
    for gamma in (0.7, 0.8):
        kap = spectral.localization_exponents(t=1.0, gamma=gamma).kappa_hn
        recs = qfi.nhse_numeric_sweep(1.0, gamma, n_list)
        rate = qfi.fit_rate_vs_n(n_list, [r.log_overlap_sq for r in recs])
        res.add(f"overlap_decay_rate_gamma{gamma}", rate / (2 * kap), 1.0, 0.10)
    gamma = 0.5
    kap = spectral.localization_exponents(t=1.0, gamma=gamma).kappa_hn
    qfi_n_list = list(range(40, 101, 10))
    recs = qfi.nhse_numeric_sweep(1.0, gamma, qfi_n_list, step=1e-5)
    rate = qfi.fit_rate_vs_n(qfi_n_list, [r.log_abs_qfi_weighted for r in recs])
    res.add("weighted_qfi_decay_rate_gamma0.5", rate / (2 * kap), 1.0, 0.15,
            note="overlap-damped ground-pair QFI, N in [40,100]: the window "
                 "where the exponential law dominates the polynomial prefactor")

    import mpmath as mp

    mp.mp.dps = 50
    for kappa, n in ((0.5, 8), (1.0, 1), (0.25, 30)):
        pair = spectral.skin_modes(kappa, n)
        j = [mp.mpf(i) for i in range(1, n + 1)]
        r = [mp.e ** (-mp.mpf(kappa) * x) for x in j]
        l = [mp.e ** (mp.mpf(kappa) * x) for x in j]
        nr = mp.sqrt(mp.fsum(x * x for x in r))
        nl = mp.sqrt(mp.fsum(x * x for x in l))
        ref = float((mp.fsum(a * b for a, b in zip(l, r)) / (nr * nl)) ** 2)
        res.add(f"skin_direct_vs_mp_k{kappa}_n{n}", pair.overlap_sq_direct, ref,
                1e-12 * max(ref, 1.0))
    pair = spectral.skin_modes(0.5, 20)
    gap = pair.log_overlap_sq_direct - pair.log_overlap_sq_exact
    res.add("closed_form_discrepancy_log_n2e2k", gap,
            2 * math.log(20) + 2 * 0.5, 1e-10,
            note="direct/exact = N^2 e^{2 kappa}: the printed closed form "
                 "drops exactly this factor")
    return res


# -- criterion 6: multiparameter matrix -------------------------------------------


@_timed
def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "Multiparameter matrix: closed forms, inverse, sensitivities")
    spec = ChainSpec(n=64, t=1.0, delta=0.1, mu=0.2, g=0.5 / 64, phi=0.1,
                     kind="multiparam")
    ms = multiparam.qfi_matrix_mode_sum(spec)
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("ignore")
        cf = multiparam.qfi_matrix_closed_form(spec)
    names = multiparam.PARAM_ORDER
    for i, nm in enumerate(names):
        ratio = ms.F[i, i] / cf.F[i, i]
        res.add(
            f"mode_sum_vs_closed_{nm}{nm}",
            ratio,
            1.0,
            0.05,
            expected_failure=True,
            note="the mode sum is linear in N (matches the honest continuum "
                 "integral); the closed form's N^2 cannot arise from it",
        )
    res.add("fmumu_band", ms.F[0, 0] / (64**2 / (4 * 0.1**2)), 0.997, 0.02,
            expected_failure=True,
            note="printed verification band; see mode_sum_vs_closed notes")
    res.add("fmuphi_band", abs(ms.F[0, 1]) / (64**2 * 0.1), 0.251, 0.02,
            expected_failure=True,
            note="printed verification band; see mode_sum_vs_closed notes")
    cont = multiparam.fmumu_continuum(64, 0.1, 1.0, 0.2)
    res.add("mode_sum_vs_honest_continuum", ms.F[0, 0] / cont, 1.0, 0.02,
            note="independent stationary-phase oracle for the mode sum")

    for n, delta, t in ((50, 0.01, 1.0), (64, 0.1, 1.0), (32, 0.05, 2.0)):
        s2 = ChainSpec(n=n, t=t, delta=delta, kind="multiparam")
        with _w.catch_warnings():
            _w.simplefilter("ignore")
            F = multiparam.qfi_matrix_closed_form(s2).F
        Finv = multiparam.qfi_matrix_inverse(n, delta, t)
        err = float(np.max(np.abs(F @ Finv - np.eye(3))))
        res.add(f"closed_inverse_identity_n{n}", err, 0.0, 1e-10)
        num = np.linalg.inv(F)
        rel = float(np.max(np.abs(Finv - num) / np.maximum(np.abs(num), 1e-300)))
        res.add(f"closed_inverse_vs_numeric_n{n}", rel, 0.0, 1e-10)

    import mpmath as mp

    mp.mp.dps = 40
    n, delta, t, nu = 50, mp.mpf("0.01"), mp.mpf(1), 1
    root = mp.sqrt(nu * (6 - delta**4))
    oracle = (
        float(2 * delta * mp.sqrt(6) / (n * root)),
        float(2 / (n * t * t * root)),
        float(2 * t / (n * delta * mp.sqrt(nu))),
    )
    got = multiparam.sensitivities(50, 0.01, 1.0, 1)
    for (nm, o, g) in zip(("mu", "phi", "g"), oracle, got):
        res.add(f"sensitivity_{nm}", g, o, 1e-6 * abs(o))
    res.add("sensitivity_mu_printed", round(got[0], 7), 4.0e-4, 5e-8)
    res.add("sensitivity_phi_printed", round(got[1], 5), 1.633e-2, 5e-6)
    res.add("sensitivity_g_printed", got[2], 4.0, 1e-12)
    return res


# -- criterion 7: braiding monodromy ----------------------------------------------


@_timed
def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "Braiding monodromy around the band-edge EP")
    spec = ChainSpec(n=6, t=1.0, g=0.5, kind="pt")
    one = protocols.braid(spec, eps=1e-2, period=10.0, steps=1024)
    res.add_bool("one_loop_swaps", one.swapped)
    two = protocols.braid(spec, eps=1e-2, period=10.0, steps=1024, loops=2)
    res.add_bool("two_loops_restore", not two.swapped)
    fine = protocols.braid(spec, eps=1e-2, period=10.0, steps=2048)
    drift = abs(fine.berry_phase - one.berry_phase)
    res.add("berry_phase_step_doubling", drift, 0.0, 1e-4)
    off = protocols.braid(spec, eps=1e-2, period=10.0, steps=1024, enclose=False)
    res.add_bool("no_enclosure_no_swap", not off.swapped)
    for n in (2, 10):
        sp = ChainSpec(n=n, t=1.0, g=0.5, kind="pt")
        res.add_bool(f"swap_n{n}", protocols.braid(sp, 1e-2, 10.0, steps=400).swapped)
    res.add_bool("adiabatic_flag", protocols.braid(spec, 1e-2, 10.0, steps=256).adiabatic_ok)
    return res


# -- criterion 8: quench and gap protocols -----------------------------------------


@_timed
def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "Quench/gap protocols: Omega, Gamma, gap exponents")
    n, t = 10, 1.0
    spec = ChainSpec(n=n, t=t, g=0.5, kind="pt")
    gc = ptphase.gc_exact(n, t)

    eps_grid = np.geomspace(0.03, 0.3, 6)
    times = np.linspace(0.0, 14.0, 700)
    oms = []
    for eps in eps_grid:
        gf = gc - eps
        q = protocols.quench_survival(
            spec, g_initial=gc - 5e-4, g_final=gf, times=times,
            omega_guess=1.1 * math.sqrt(gc * gc - gf * gf),
        )
        oms.append(q.omega_fit)
    om_exp = float(np.polyfit(np.log(eps_grid), np.log(oms), 1)[0])
    res.add("omega_exponent", om_exp, 0.5, 0.1)

    eps_grid = np.geomspace(1e-3, 1e-2, 7)
    times = np.linspace(0.0, 4.0, 400)
    gs = []
    for eps in eps_grid:
        lam = math.sqrt((gc + eps) ** 2 - gc * gc)
        q = protocols.quench_survival(
            spec, g_initial=gc - 5e-4, g_final=gc + eps, times=times,
            omega_guess=lam / 2,
        )
        gs.append(max(q.gamma_fit, 1e-300))
    g_exp = float(np.polyfit(np.log(eps_grid), np.log(gs), 1)[0])
    res.add(
        "gamma_exponent",
        g_exp,
        1.0,
        0.2,
        expected_failure=True,
        note="the only intrinsic decay scale is lambda = sqrt(g^2 - g_c^2) "
             "~ eps^1/2; fixed-window fits track the quadratic transient "
             "(exponent ~2), scale-free windows track lambda (exponent ~0.5); "
             "no protocol realizes the printed linear law",
    )

    gap = protocols.adiabatic_gap_scan(spec, gc - np.geomspace(1e-5, 1e-2, 10))
    res.add("gap_exponent", gap["exponent"], 0.5, 0.02)
    return res


# -- criterion 9: noise closed forms ------------------------------------------------


@_timed
def criterion_9() -> CriterionResult:
    res = CriterionResult(9, "Noise closed forms and the capped enhancement")
    np1 = noise.NoiseParams(gamma_phi=0.5, gamma_pt=0.5)
    val = noise.qfi_decay(1.0, np1, g=0.5, g_c=1.0, time=1.0).value
    res.add("qfi_decay_fixture", val, 0.4842, 1e-4)
    res.add("gamma_eff_fixture_1",
            noise.gamma_eff(noise.NoiseParams(gamma_phi=1.0, gamma_minus=2.0), 0.3, 1.0),
            2.0, 1e-14)
    res.add("gamma_eff_fixture_2",
            noise.gamma_eff(noise.NoiseParams(gamma_pt=1.0), 0.5, 1.0), 1.0, 1e-14)
    res.add("gamma_eff_fixture_3",
            noise.gamma_eff(
                noise.NoiseParams(gamma_phi=0.05, gamma_minus=0.01, gamma_pt=0.1),
                0.25, 1.0),
            0.105, 1e-14)
    res.add("nonmarkov_20pct", noise.gamma_eff_nonmarkov(1.0, 0.2, 1.0), 1.2, 1e-14)
    res.add("nonmarkov_example", noise.gamma_eff_nonmarkov(1.0, 0.1, 1.0), 1.1, 1e-14)
    res.add("stability_detuning", noise.stability_detuning(1e-4, 1.0), 0.01, 1e-14)
    t2 = 2.0 * math.pi * 1e7 * 1e-4  # T2* = 100 us at t/2pi = 10 MHz, units of 1/t
    cap = noise.eta_cap(t=1.0, n=50, gamma_eff_nm=1e-3, eps_sys=0.01, t2=t2)
    res.add("eta_cap_value", cap["eta"], 1000.0, 100.0,
            note=f"exact branch value {cap['eta']:.4f} = t*T2/6 with "
                 "t*T2 = 2000 pi under the documented angular-frequency convention")
    res.add("eta_cap_exact_t2_branch", cap["eta"], t2 / 6.0, 1e-9)
    res.add_bool("eta_cap_active_branch_is_t2", cap["active_branch"] == "t2")
    res.add("eta_cap_raw_8333", cap["raw"], 8333.3333333, 1e-4)
    return res


# -- criterion 10: solver bench ------------------------------------------------------


@_timed
def criterion_10(sizes=(250, 400, 650, 1000, 1600), agreement_sizes=(200, 1000, 2000),
                 repeats: int = 5) -> CriterionResult:
    res = CriterionResult(10, "Eigensolver bench: agreement, exponents, ordering")
    out = bench_mod.run_bench(sorted(set(sizes) | set(agreement_sizes)), repeats=repeats)
    for n in agreement_sizes:
        res.add(f"spectra_agreement_n{n}", out["agreement"][n], 0.0, 1e-8)
    worst_resid = max(r.max_residual for r in out["records"])
    res.add("residual_gate", worst_resid, 0.0, bench_mod.RESIDUAL_GATE)
    fit_records = [r for r in out["records"] if r.n in set(sizes)]
    exps = bench_mod.scaling_fit(fit_records)
    dense = exps["dense_general"]["exponent"]
    banded = exps["banded_specialized"]["exponent"]
    res.add("dense_exponent", dense, 3.0, 0.5)
    res.add_bool("banded_exponent_lower_by_half", banded <= dense - 0.5,
                 note=f"dense {dense:.3f} vs banded {banded:.3f}")
    t_dense = next(r.wall_seconds for r in out["records"]
                   if r.n == 1000 and r.method == "dense_general")
    t_band = next(r.wall_seconds for r in out["records"]
                  if r.n == 1000 and r.method == "banded_specialized")
    res.add_bool("banded_faster_at_1000", t_band < t_dense,
                 note=f"banded {t_band:.4f}s vs dense {t_dense:.4f}s")
    return res


# -- criterion 11: figure determinism -------------------------------------------------


@_timed
def criterion_11(workdir: str | None = None) -> CriterionResult:
    import hashlib
    import tempfile

    res = CriterionResult(11, "Figure CSVs: deterministic and equal to module outputs")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        for name in figures.FIGURES:
            kwargs = {}
            if name == "figS4":
                kwargs = {"bench_sizes": (100, 200), "repeats": 2}
            if name == "figS3":
                kwargs = {"n_values": [8, 12, 16], "ratios": [0.2, 0.5, 1.5, 2.2]}
            p1 = figures.emit_figure(name, f"{tmp}/a", **kwargs)["csv"]
            p2 = figures.emit_figure(name, f"{tmp}/b", **kwargs)["csv"]
            h1 = hashlib.sha256(open(p1, "rb").read()).hexdigest()
            h2 = hashlib.sha256(open(p2, "rb").read()).hexdigest()
            deterministic = h1 == h2
            if name == "figS4":
                rows1 = figures.read_csv(p1)
                rows2 = figures.read_csv(p2)
                keep = [i for i, r in enumerate(rows1) if r["panel"] != "performance"]
                deterministic = all(rows1[i] == rows2[i] for i in keep)
            res.add_bool(f"{name}_deterministic", deterministic,
                         note="timing panel exempt" if name == "figS4" else "")
        rows = figures.read_csv(figures.emit_figure("fig1", f"{tmp}/c")["csv"])
        pt = next(r for r in rows if r["panel"] == "ep"
                  and r["curve"] == "delta=0.001" and r["n"] == "50")
        res.add_bool(
            "fig1_value_matches_module",
            float(pt["value"]) == qfi.qfi_ep_analytic(50, 1.0, 1e-3).value,
        )
        k = figures.FIG1_KAPPAS[0]
        pn = next(r for r in rows if r["panel"] == "nhse"
                  and r["curve"] == f"kappa={k}" and r["n"] == "50")
        res.add_bool(
            "fig1_nhse_matches_module",
            float(pn["log10_value"]) == qfi.qfi_nhse_analytic(50, k, 1.0).log10_value,
        )
    return res


ALL_CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
    criterion_11,
)


def run_all(quick: bool = False) -> list[CriterionResult]:
    """Run every criterion (quick mode shrinks the bench sizes)."""
    results = []
    for fn in ALL_CRITERIA:
        if quick and fn is criterion_10:
            results.append(criterion_10(sizes=(100, 150, 250, 400), agreement_sizes=(200, 400),
                                        repeats=3))
            continue
        results.append(fn())
    return results


def format_report(results) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else ("FAIL(known)" if r.passed_modulo_known else "FAIL")
        lines.append(f"[{status}] criterion {r.cid}: {r.title} ({r.runtime_seconds:.1f}s)")
        for c in r.checks:
            mark = "ok" if c.passed else ("XFAIL" if c.expected_failure else "FAIL")
            lines.append(
                f"    {mark:5s} {c.name}: measured={c.measured:.6g} "
                f"expected={c.expected:.6g} tol={c.tol:.2g}"
                + (f"  [{c.note}]" if c.note else "")
            )
    npass = sum(r.passed for r in results)
    nknown = sum((not r.passed) and r.passed_modulo_known for r in results)
    nfail = len(results) - npass - nknown
    lines.append(
        f"summary: {npass} pass, {nknown} fail only on documented-defect checks, "
        f"{nfail} fail otherwise"
    )
    return "\n".join(lines)


def report_json(results) -> str:
    return json.dumps(
        [
            {
                "criterion": r.cid,
                "title": r.title,
                "passed": r.passed,
                "passed_modulo_known_defects": r.passed_modulo_known,
                "runtime_seconds": r.runtime_seconds,
                "checks": [c.__dict__ for c in r.checks],
            }
            for r in results
        ],
        indent=2,
    )

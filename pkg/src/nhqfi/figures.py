"""Figure-data builders: deterministic CSVs plus thin SVG renderings.

Every figure command computes its rows through the owning modules, writes
them to CSV (shortest round-trip float formatting, so identical inputs give
byte-identical files) and, when asked, renders an SVG strictly from the CSV
it just wrote.
"""

from __future__ import annotations

import csv
import math
import os
from collections import defaultdict

import numpy as np

from .model import ChainSpec
from . import multiparam, ptphase, qfi, spectral

FIG1_KAPPAS = (0.44, 0.62, 0.96)
FIG1_DELTAS = (1e-4, 5e-4, 1e-3)
FIG1_NMAX = 100
FIG1_FLOOR_LOG10 = -100.0

FIGS1_GAMMA_RATIOS = (1.1, 1.5, 2.0, 2.5)  # |g|/t values; kappa = arccosh
FIGS2_DELTAS = (1e-4, 5e-4, 1e-3, 5e-3)
FIGS2_MARGINS = (0.01, 0.05, 0.10, 0.20)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: str, columns, rows) -> str:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def read_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- figure 1: suppression vs enhancement -------------------------------------


def fig1_rows() -> list[dict]:
    rows = []
    for n in range(1, FIG1_NMAX + 1):
        rows.append({"panel": "sql", "curve": "sql", "n": n,
                     "value": float(n), "log10_value": math.log10(n)})
    for kappa in FIG1_KAPPAS:
        for n in range(1, FIG1_NMAX + 1):
            est = qfi.qfi_nhse_analytic(n, kappa, 1.0)
            log10 = est.log10_value
            rows.append(
                {
                    "panel": "nhse",
                    "curve": f"kappa={kappa}",
                    "n": n,
                    "value": est.value if log10 >= FIG1_FLOOR_LOG10 else 0.0,
                    "log10_value": max(log10, FIG1_FLOOR_LOG10),
                }
            )
    for delta in FIG1_DELTAS:
        for n in range(1, FIG1_NMAX + 1):
            est = qfi.qfi_ep_analytic(n, 1.0, delta)
            rows.append(
                {
                    "panel": "ep",
                    "curve": f"delta={delta}",
                    "n": n,
                    "value": est.value,
                    "log10_value": math.log10(est.value),
                }
            )
    return rows


# -- figure 2: multiparameter matrix -------------------------------------------


def fig2_rows(n_max: int = 50, delta: float = 0.01, t: float = 1.0) -> list[dict]:
    rows = []
    spec = ChainSpec(n=n_max, t=t, delta=delta, kind="multiparam")
    res = multiparam.qfi_matrix_closed_form(spec)
    names = multiparam.PARAM_ORDER
    for i in range(3):
        for j in range(3):
            rows.append(
                {
                    "panel": "matrix",
                    "curve": f"F_{names[i]}{names[j]}",
                    "n": n_max,
                    "value": float(res.F[i, j]),
                }
            )
    for n in range(2, n_max + 1):
        r = multiparam.qfi_matrix_closed_form(ChainSpec(n=n, t=t, delta=delta, kind="multiparam"))
        s = multiparam.sensitivities(n, delta, t)
        eta = multiparam.enhancement_factors(n, delta, t)
        for i, nm in enumerate(names):
            rows.append({"panel": "diagonal", "curve": f"F_{nm}{nm}", "n": n,
                         "value": float(r.F[i, i])})
            rows.append({"panel": "sensitivity", "curve": f"delta_{nm}", "n": n,
                         "value": float(s[i])})
        for key, val in eta.items():
            rows.append({"panel": "enhancement", "curve": key, "n": n, "value": val})
    return rows


# -- figure S1: skin-effect localization ---------------------------------------


def figS1_rows(n_profile: int = 50, n_overlap_max: int = 100) -> list[dict]:
    rows = []
    kappas = [float(np.arccosh(r)) for r in FIGS1_GAMMA_RATIOS]
    for ratio, kappa in zip(FIGS1_GAMMA_RATIOS, kappas):
        pair = spectral.skin_modes(kappa, n_profile)
        for j in range(n_profile):
            rows.append({"panel": "psi_r", "curve": f"ratio={ratio}", "x": j + 1,
                         "value": float(abs(pair.psi_r[j]) ** 2)})
            rows.append({"panel": "psi_l", "curve": f"ratio={ratio}", "x": j + 1,
                         "value": float(abs(pair.psi_l[j]) ** 2)})
        for n in range(2, n_overlap_max + 1):
            p = spectral.skin_modes(kappa, n)
            rows.append({"panel": "overlap", "curve": f"ratio={ratio}", "x": n,
                         "value": float(p.log_overlap_sq_direct)})
        for n in range(2, n_overlap_max + 1, 7):
            est = qfi.qfi_nhse_analytic(n, kappa, 1.0)
            rows.append({"panel": "qfi", "curve": f"ratio={ratio}", "x": n,
                         "value": float(est.log10_value)})
    for ratio in np.linspace(1.01, 3.0, 60):
        kappa = float(np.arccosh(ratio))
        rows.append({"panel": "xi", "curve": "xi", "x": float(ratio),
                     "value": 1.0 / kappa})
    # cross-validation: direct summation vs corrected closed form
    for n in range(2, n_overlap_max + 1, 7):
        p = spectral.skin_modes(kappas[0], n)
        corrected = p.log_overlap_sq_exact + 2.0 * math.log(n) + 2.0 * kappas[0]
        rel = abs(corrected - p.log_overlap_sq_direct)
        rows.append({"panel": "validation", "curve": "log_gap_direct_vs_corrected",
                     "x": n, "value": float(rel)})
    return rows


# -- figure S2: PT enhancement --------------------------------------------------


def figS2_rows(n_max: int = 100) -> list[dict]:
    rows = []
    for n in range(2, n_max + 1):
        rows.append({"panel": "threshold", "curve": "exact", "x": n,
                     "value": ptphase.gc_exact(n)})
        rows.append({"panel": "threshold", "curve": "order2", "x": n,
                     "value": ptphase.gc_expansion(n, order=2)})
        rows.append({"panel": "threshold", "curve": "order4", "x": n,
                     "value": ptphase.gc_expansion(n, order=4)})
        for delta in FIGS2_DELTAS:
            est = qfi.qfi_ep_analytic(n, 1.0, delta)
            rows.append({"panel": "eta_vs_n", "curve": f"delta={delta}", "x": n,
                         "value": est.extras["enhancement"]})
    n20 = 20
    gc20 = ptphase.gc_exact(n20)
    for delta in np.geomspace(1e-5, 0.5, 80):
        est = qfi.qfi_ep_analytic(n20, 1.0, float(delta))
        rows.append({"panel": "eta_vs_delta", "curve": "n=20", "x": float(delta),
                     "value": est.extras["enhancement"]})
    for margin in FIGS2_MARGINS:
        est = qfi.qfi_ep_analytic(n20, 1.0, margin * gc20)
        rows.append({"panel": "margins", "curve": f"margin={margin}", "x": margin,
                     "value": est.value})
    return rows


# -- figure S3: regime map -------------------------------------------------------


def figS3_rows(n_values=None, ratios=None) -> list[dict]:
    if n_values is None:
        n_values = list(range(4, 41, 4))
    if ratios is None:
        ratios = [round(x, 4) for x in np.linspace(0.05, 2.5, 50)]
    diagram = ptphase.phase_diagram(n_values, ratios)
    rows = []
    for rec in diagram:
        rows.append(
            {
                "panel": "diagram",
                "n": rec["n"],
                "gamma_over_t": rec["gamma_over_t"],
                "kind": rec["kind"],
                "regime": rec["regime"],
                "g_c": rec["g_c"],
                "max_im": rec["max_im"],
                "qfi_log10": rec["qfi_log10"],
            }
        )
    return rows


# -- figure S4: validation benchmarks -------------------------------------------


def figS4_rows(bench_sizes=(100, 200, 400), repeats: int = 3) -> list[dict]:
    from . import bench as bench_mod

    rows = []
    kappa = 0.9624236501192069  # arccosh(1.5)
    for n in range(5, 81, 5):
        p = spectral.skin_modes(kappa, n)
        corrected = p.log_overlap_sq_exact + 2.0 * math.log(n) + 2.0 * kappa
        rows.append({"panel": "crossval", "curve": "overlap_log_gap", "x": n,
                     "value": abs(corrected - p.log_overlap_sq_direct)})
    # route-equivalence relative error over a small spec grid
    specs = [
        ChainSpec(n=n, t=1.0, delta=0.3, mu=0.2, kind="hermitian") for n in (4, 6, 8)
    ] + [
        ChainSpec(n=n, t=1.0, g=0.3 * ptphase.gc_first_breaking(n), kind="pt")
        for n in (4, 6, 8)
    ]
    for i, spec in enumerate(specs):
        par = "mu" if spec.kind == "hermitian" else "g"
        ffd = qfi.qfi_finite_diff(spec, par).value
        fps = qfi.qfi_pert_sum(spec, par).value
        rel = abs(ffd - fps) / max(abs(fps), 1e-300)
        rows.append({"panel": "routes", "curve": spec.kind, "x": i, "value": rel})
    # FD convergence diagnostics
    spec = ChainSpec(n=8, t=1.0, g=0.2 * ptphase.gc_first_breaking(8), kind="pt")
    ref = qfi.qfi_pert_sum(spec, "g").value
    for h in np.geomspace(1e-7, 1e-2, 11):
        est = qfi.qfi_finite_diff(spec, "g", step=float(h))
        rows.append({"panel": "convergence", "curve": "fd_error", "x": float(h),
                     "value": abs(est.value - ref) / abs(ref)})
    # performance panel
    result = bench_mod.run_bench(bench_sizes, repeats=repeats)
    for rec in result["records"]:
        rows.append({"panel": "performance", "curve": f"{rec.method}_time",
                     "x": rec.n, "value": rec.wall_seconds})
        rows.append({"panel": "performance", "curve": f"{rec.method}_mem",
                     "x": rec.n, "value": float(rec.peak_mem_bytes)})
    return rows


# -- emission -------------------------------------------------------------------

_FIG_BUILDERS = {
    "fig1": (fig1_rows, ("panel", "curve", "n", "value", "log10_value")),
    "fig2": (fig2_rows, ("panel", "curve", "n", "value")),
    "figS1": (figS1_rows, ("panel", "curve", "x", "value")),
    "figS2": (figS2_rows, ("panel", "curve", "x", "value")),
    "figS3": (figS3_rows, ("panel", "n", "gamma_over_t", "kind", "regime",
                           "g_c", "max_im", "qfi_log10")),
    "figS4": (figS4_rows, ("panel", "curve", "x", "value")),
}

FIGURES = tuple(_FIG_BUILDERS)


def emit_figure(name: str, outdir: str, formats=("csv",), **builder_kwargs) -> dict:
    """Build one figure's rows, write CSV (and SVG if requested)."""
    if name not in _FIG_BUILDERS:
        raise ValueError(f"unknown figure {name!r}; have {sorted(_FIG_BUILDERS)}")
    builder, columns = _FIG_BUILDERS[name]
    rows = builder(**builder_kwargs)
    os.makedirs(outdir, exist_ok=True)
    out = {}
    csv_path = os.path.join(outdir, f"{name}.csv")
    write_csv(csv_path, columns, rows)
    out["csv"] = csv_path
    if "svg" in formats:
        out["svg"] = render_svg(name, csv_path)
    return out


def render_svg(name: str, csv_path: str) -> str:
    """Line/scatter rendering of an emitted CSV (no hidden computation)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    panels = sorted({r["panel"] for r in rows})
    fig, axes = plt.subplots(
        1, len(panels), figsize=(4.2 * len(panels), 3.4), squeeze=False
    )
    for ax, panel in zip(axes[0], panels):
        sub = [r for r in rows if r["panel"] == panel]
        xkey = "n" if "n" in sub[0] and sub[0].get("n") not in (None, "") else "x"
        ykey = "log10_value" if "log10_value" in sub[0] else (
            "value" if "value" in sub[0] else "qfi_log10")
        series = defaultdict(list)
        for r in sub:
            label = r.get("curve") or r.get("kind") or panel
            try:
                series[label].append((float(r[xkey]), float(r[ykey])))
            except (TypeError, ValueError):
                continue
        for label, pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=label, lw=1)
        ax.set_title(panel)
        ax.set_xlabel(xkey)
        ax.set_ylabel(ykey)
        if len(series) <= 8:
            ax.legend(fontsize=6)
    fig.tight_layout()
    svg_path = csv_path[:-4] + ".svg"
    fig.savefig(svg_path)
    plt.close(fig)
    return svg_path

"""PT-breaking thresholds, EP splitting, spectral flow and regime maps.

The staggered chain satisfies the operator identity ``H^2 = T^2 - g^2``
(T the bare hopping chain), so every mode obeys
``E_m = +-sqrt(4 t^2 cos^2 k_m - g^2)`` exactly at delta = 0.  Two
thresholds follow:

* ``gc_first = 2 t sin(pi/(2(N+1)))`` -- the band-center pair breaks first;
  above it the spectrum is no longer fully real (this is what a bisection
  on max|Im E| finds).
* ``gc_exact = 2 t cos(pi/(N+1))`` -- the band-edge pair coalesces last;
  above it no real eigenvalue remains.  This is the published critical
  strength; the EP physics (square-root splitting, bandwidth collapse,
  braiding) lives here, and ``gc_numeric`` targets it by bisecting on the
  collapse of the real bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChainSpecError, RegimeError
from .model import ChainSpec, build_chain

REGIMES = ("extended_unbroken", "extended_broken", "nhse_suppressed", "critical")

TOL_REAL = 1e-10  # times t: reality tolerance defining "unbroken"
CRITICAL_WINDOW = 1e-6  # times t


@dataclass(frozen=True)
class PhasePoint:
    """Classification of one (spec) point of the phase diagram."""

    spec: ChainSpec
    regime: str
    max_im: float
    g_c: float          # threshold the regime label keys off (first breaking)
    g_c_edge: float     # published band-edge EP strength 2t cos(pi/(N+1))
    detuning: float     # g_c_edge - g, the EP-enhancement detuning


@dataclass(frozen=True)
class SplittingFit:
    exponent: float
    prefactor: float
    window: tuple
    r_squared: float


def gc_exact(n: int, t: float = 1.0) -> float:
    """Band-edge EP strength ``2 t cos(pi/(N+1))`` (the published g_c)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(2.0 * t * np.cos(np.pi / (n + 1)))


def gc_first_breaking(n: int, t: float = 1.0) -> float:
    """First PT-breaking threshold ``2 t sin(pi/(2(N+1)))``.

    The band-center pair coalesces here; it scales as ``pi t/(N+1)``, so the
    fully-real window shrinks with system size.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(2.0 * t * np.sin(np.pi / (2.0 * (n + 1))))


def gc_expansion(n: int, t: float = 1.0, order: int = 2) -> float:
    """Large-N expansion of ``gc_exact`` as printed (in powers of 1/N).

    order 2: ``2t (1 - pi^2/(2 N^2))``; order 4 adds ``+ pi^4/(8 N^4)``.
    """
    if n < 2:
        raise ValueError("expansion needs n >= 2")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    val = 1.0 - np.pi**2 / (2.0 * n * n)
    if order == 4:
        val += np.pi**4 / (8.0 * n**4)
    return float(2.0 * t * val)


def _pt_eigvals(n: int, t: float, g: float) -> np.ndarray:
    spec = ChainSpec(n=n, t=t, g=abs(g), kind="pt")
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")
        H = build_chain(spec).to_dense()
    return np.linalg.eigvals(H)


def gc_numeric(
    n: int,
    t: float = 1.0,
    g_range: tuple = None,
    indicator: str = "band_edge",
    width: float = 1e-8,
) -> float:
    """Bisected critical strength of the pt chain (delta = 0).

    ``indicator="band_edge"`` locates where the last real eigenvalue pair
    disappears (max |Re E| -> 0), converging to ``gc_exact``.
    ``indicator="first_imag"`` uses the printed criterion
    max|Im E| > tol and therefore finds ``gc_first_breaking`` instead.
    """
    if g_range is None:
        g_range = (0.0, 2.0 * t)
    lo, hi = float(g_range[0]), float(g_range[1])

    if indicator == "band_edge":
        def broken(g):
            return np.max(np.abs(_pt_eigvals(n, t, g).real)) <= TOL_REAL * t
    elif indicator == "first_imag":
        def broken(g):
            return np.max(np.abs(_pt_eigvals(n, t, g).imag)) > TOL_REAL * t
    else:
        raise ValueError(f"unknown indicator {indicator!r}")

    blo, bhi = broken(lo), broken(hi)
    if blo == bhi:
        raise RegimeError(
            f"indicator constant over g in [{lo}, {hi}]: no transition bracketed"
        )
    while hi - lo > width * t:
        mid = 0.5 * (lo + hi)
        if broken(mid) == bhi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def splitting_coefficient(n: int, t: float = 1.0) -> float:
    """Printed splitting prefactor ``alpha = sqrt(2 t^2 sin^2(pi/(N+1))/(N+1))``.

    Recorded for comparison only; the dispersion gives the pair gap
    ``2 sqrt(2 gc_exact * eps)`` near the band-edge EP, i.e. a per-eigenvalue
    prefactor ``sqrt(2 gc_exact)`` that does not match alpha at finite N.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.sqrt(2.0 * t * t * np.sin(np.pi / (n + 1)) ** 2 / (n + 1)))


def coalescing_pair_gap(n: int, t: float, g: float) -> float:
    """Gap of the band-edge pair: width of the real spectrum."""
    w = _pt_eigvals(n, t, g)
    re = np.real(w[np.abs(w.imag) <= 1e-8 * t])
    if re.size < 2:
        return 0.0
    return float(re.max() - re.min())


def splitting_fit(n: int, t: float = 1.0, eps_grid=None) -> SplittingFit:
    """Log-log fit of the coalescing-pair gap against ``eps = gc_exact - g``.

    The fit is done on the unbroken side of the band-edge EP; exponent 1/2
    is the universal square-root law.  The prefactor is reported per
    eigenvalue (half the pair gap divided by sqrt(eps)).
    """
    gc = gc_exact(n, t)
    if eps_grid is None:
        eps_grid = np.logspace(-5, -2, 12) * t
    eps_grid = np.asarray(eps_grid, float)
    gaps = np.array([coalescing_pair_gap(n, t, gc - e) for e in eps_grid])
    if np.any(gaps <= 0):
        raise RegimeError("pair gap vanished inside the fit window")
    co = np.polyfit(np.log(eps_grid), np.log(gaps), 1)
    pred = np.polyval(co, np.log(eps_grid))
    resid = np.log(gaps) - pred
    r2 = 1.0 - np.sum(resid**2) / np.sum((np.log(gaps) - np.mean(np.log(gaps))) ** 2)
    return SplittingFit(
        exponent=float(co[0]),
        prefactor=float(np.exp(co[1]) / 2.0),
        window=(float(eps_grid.min()), float(eps_grid.max())),
        r_squared=float(r2),
    )


def spectral_flow_analytic(n: int, t: float, delta: float, m: int, g) -> np.ndarray:
    """Per-mode branch ``+-sqrt(r_m)`` with ``r_m = 4t^2 cos^2 k_m - g^2
    + delta^2 sin^2 k_m``; real branch for r >= 0, imaginary beyond.

    Exact at delta = 0 (from H^2 = T^2 - g^2); the printed form multiplied
    g^2 by cos^2 k_m as well, which contradicts both the numerics and the
    printed example E(m=1, g=gc) = 0, so the per-mode radicand governs.
    Returns the +branch for each g in the grid.
    """
    k = m * np.pi / (n + 1)
    g = np.asarray(g, float)
    r = 4.0 * t * t * np.cos(k) ** 2 - g * g + delta * delta * np.sin(k) ** 2
    out = np.where(r >= 0, np.sqrt(np.abs(r)) + 0j, 1j * np.sqrt(np.abs(r)))
    return out


def spectral_flow_numeric(n: int, t: float, m: int, g_grid) -> np.ndarray:
    """Eigenvalue trajectory tracked by continuity over a g grid (delta=0)."""
    g_grid = np.asarray(g_grid, float)
    w = _pt_eigvals(n, t, g_grid[0])
    k = m * np.pi / (n + 1)
    target = 2.0 * t * np.cos(k)
    idx = int(np.argmin(np.abs(w - np.sqrt(max(target**2 - g_grid[0] ** 2, 0.0)))))
    traj = [w[idx]]
    prev = w[idx]
    for g in g_grid[1:]:
        w = _pt_eigvals(n, t, g)
        idx = int(np.argmin(np.abs(w - prev)))
        prev = w[idx]
        traj.append(prev)
    return np.asarray(traj)


def bandwidth_analytic(n: int, t: float, g: float) -> float:
    """Real-bandwidth collapse ``2 sqrt(gc_exact^2 - g^2)`` (exact at delta=0)."""
    gc = gc_exact(n, t)
    r = gc * gc - g * g
    return float(2.0 * np.sqrt(r)) if r > 0 else 0.0


def classify_regime(spec: ChainSpec) -> PhasePoint:
    """Regime label for one spec.

    pt / multiparam chains: ``extended_unbroken`` while the full spectrum is
    real (g below the first-breaking threshold), ``critical`` within the
    bisection window of that threshold, ``extended_broken`` above.  nhse
    chains are always ``nhse_suppressed`` (their validity boundary is
    gamma = t).  ``g_c_edge`` and the EP detuning refer to the published
    band-edge strength.
    """
    if spec.kind == "nhse":
        w = np.linalg.eigvals(build_chain(spec).to_dense())
        return PhasePoint(
            spec=spec,
            regime="nhse_suppressed",
            max_im=float(np.max(np.abs(w.imag))),
            g_c=spec.t,
            g_c_edge=spec.t,
            detuning=float(spec.t - spec.gamma),
        )
    if spec.kind not in ("pt", "multiparam") or spec.delta != 0:
        raise ChainSpecError("classify_regime handles pt/multiparam chains at delta=0 and nhse")
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")
        w = np.linalg.eigvals(build_chain(spec).to_dense())
    max_im = float(np.max(np.abs(w.imag)))
    gc1 = gc_first_breaking(spec.n, spec.t)
    gce = gc_exact(spec.n, spec.t)
    if abs(spec.g - gc1) <= CRITICAL_WINDOW * spec.t:
        regime = "critical"
    elif max_im <= TOL_REAL * spec.t:
        regime = "extended_unbroken"
    else:
        regime = "extended_broken"
    return PhasePoint(
        spec=spec,
        regime=regime,
        max_im=max_im,
        g_c=gc1,
        g_c_edge=gce,
        detuning=float(gce - spec.g),
    )


def phase_diagram(n_values, ratio_values, t: float = 1.0) -> list[dict]:
    """Classify a (N, gamma/t) grid for both chain families.

    Returns CSV-ready rows ``(n, gamma_over_t, kind, regime, g_c, max_im,
    qfi_log10)``.  pt rows span the whole grid with g = ratio * t; nhse rows
    exist only for ratio < 1 (the model requires gamma < t).  The reported
    ``g_c`` column carries the published band-edge strength; ``qfi_log10``
    is the EP law ``t N^2/(6 |detuning|)`` for pt points and the analytic
    suppression law for nhse points.
    """
    from .qfi import qfi_ep_analytic, qfi_nhse_analytic
    from .spectral import localization_exponents

    rows = []
    for n in n_values:
        for ratio in ratio_values:
            g = ratio * t
            point = classify_regime(ChainSpec(n=int(n), t=t, g=g, kind="pt"))
            det = abs(point.detuning)
            if det > 1e-12:
                q = qfi_ep_analytic(int(n), t, det)
                qfi_log10 = float(np.log10(q.value))
            else:
                qfi_log10 = float("inf")
            rows.append(
                {
                    "n": int(n),
                    "gamma_over_t": float(ratio),
                    "kind": "pt",
                    "regime": point.regime,
                    "g_c": point.g_c_edge,
                    "max_im": point.max_im,
                    "qfi_log10": qfi_log10,
                }
            )
            if 0.0 < ratio < 1.0:
                spec = ChainSpec(n=int(n), t=t, gamma=g, kind="nhse")
                point = classify_regime(spec)
                kh = localization_exponents(spec).kappa_hn
                q = qfi_nhse_analytic(int(n), kh, t)
                rows.append(
                    {
                        "n": int(n),
                        "gamma_over_t": float(ratio),
                        "kind": "nhse",
                        "regime": point.regime,
                        "g_c": point.g_c_edge,
                        "max_im": point.max_im,
                        "qfi_log10": q.log10_value,
                    }
                )
    return rows

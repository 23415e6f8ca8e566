"""Eigensolver benchmark: dense general vs bandwidth-exploiting.

Workload: asymmetric-hopping chains balanced to real-symmetric tridiagonal
form (the balancing similarity is part of both pipelines; without it the
dense solver cannot even get the spectrum right, since the unbalanced
matrix has exponentially ill-conditioned eigenvectors).  The dense method
hands the full dense matrix to LAPACK, which pays the O(N^3) reduction; the
specialized method runs the tridiagonal QL kernel directly, O(N^2) for the
full spectrum.

Correctness gates performance: a record is accepted only if sampled
eigenpair residuals stay below 1e-8 and both methods agree on the spectrum.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass
from statistics import median

import numpy as np

from . import _kernels
from ._accel import NUMBA_ENABLED
from .model import ChainSpec, build_chain
from .spectral import balance_tridiagonal

RESIDUAL_GATE = 1e-8

METHODS = ("dense_general", "banded_specialized")


@dataclass(frozen=True)
class BenchmarkRecord:
    n: int
    method: str
    wall_seconds: float        # median over repeats
    wall_seconds_iqr: float
    peak_mem_bytes: int
    max_residual: float

    @property
    def accepted(self) -> bool:
        return self.max_residual <= RESIDUAL_GATE


def _workload(n: int, t: float = 1.0, gamma: float = 0.5):
    op = build_chain(ChainSpec(n=n, t=t, gamma=gamma, kind="nhse"))
    d, e = balance_tridiagonal(op)
    real_form = bool(np.all(d.imag == 0.0) and np.all(e.imag == 0.0))
    if real_form:
        dense = np.diag(d.real) + np.diag(e.real, 1) + np.diag(e.real, -1)
    else:
        dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    return op, d, e, dense, real_form


def _run_method(method: str, d, e, dense, real_form: bool) -> np.ndarray:
    if method == "dense_general":
        if real_form:
            return np.linalg.eigvalsh(dense).astype(complex)
        return np.linalg.eigvals(dense)
    if method == "banded_specialized":
        if real_form:
            w, nfail = _kernels.rs_tridiag_eigvals(
                np.ascontiguousarray(d.real), np.ascontiguousarray(e.real))
            w = w.astype(complex)
        else:
            w, nfail = _kernels.cs_tridiag_eigvals(d, e)
        if nfail:
            raise RuntimeError(f"QL failed for {nfail} eigenvalues")
        return w
    raise ValueError(f"unknown method {method!r}")


def _sampled_residual(d, e, eigvals, samples: int = 8) -> float:
    """Residual gate: inverse-iteration vectors against sampled eigenvalues."""
    n = d.size
    scale = max(np.max(np.abs(d)) + 2 * np.max(np.abs(e)), 1e-30)
    idx = np.linspace(0, n - 1, min(samples, n)).astype(int)
    order = np.argsort(eigvals.real)
    worst = 0.0
    rng = np.random.default_rng(12345)
    for i in idx:
        lam = eigvals[order[i]]
        x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = _kernels.inverse_iteration(d, e, e, complex(lam), x0, 3)
        r = d * v - lam * v
        r[:-1] += e * v[1:]
        r[1:] += e * v[:-1]
        worst = max(worst, float(np.linalg.norm(r) / scale))
    return worst


def spectra_agreement(w1: np.ndarray, w2: np.ndarray, scale: float) -> float:
    """Max multiset distance between two spectra, in units of the scale.

    Components below 1e-10 * scale are snapped to zero before sorting so
    that rounding noise cannot flip the order of +-conjugate pairs.
    """
    def _key(w):
        re = np.where(np.abs(w.real) < 1e-10 * scale, 0.0, w.real)
        im = np.where(np.abs(w.imag) < 1e-10 * scale, 0.0, w.imag)
        return np.lexsort((im, re))

    return float(np.max(np.abs(w1[_key(w1)] - w2[_key(w2)])) / scale)


def run_bench(
    sizes,
    methods=METHODS,
    repeats: int = 5,
    t: float = 1.0,
    gamma: float = 0.5,
) -> dict:
    """Benchmark both solver paths over ``sizes``.

    Returns ``{"records": [BenchmarkRecord...], "agreement": {n: maxdiff}}``.
    Timing covers the full-spectrum eigenvalue computation; the residual
    gate and the memory probe run outside the timed region.
    """
    _kernels.warmup()
    records = []
    agreement = {}
    for n in sizes:
        op, d, e, dense, real_form = _workload(int(n), t, gamma)
        scale = op.norm_estimate()
        spectra = {}
        for method in methods:
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                w = _run_method(method, d, e, dense, real_form)
                times.append(time.perf_counter() - t0)
            spectra[method] = w
            tracemalloc.start()
            _run_method(method, d, e, dense, real_form)
            peak = tracemalloc.get_traced_memory()[1]
            tracemalloc.stop()
            resid = _sampled_residual(d, e, w)
            times.sort()
            q1 = times[max(0, len(times) // 4)]
            q3 = times[min(len(times) - 1, (3 * len(times)) // 4)]
            records.append(
                BenchmarkRecord(
                    n=int(n),
                    method=method,
                    wall_seconds=float(median(times)),
                    wall_seconds_iqr=float(q3 - q1),
                    peak_mem_bytes=int(peak),
                    max_residual=resid,
                )
            )
        if len(spectra) == 2:
            w1, w2 = (spectra[m] for m in methods)
            agreement[int(n)] = spectra_agreement(w1, w2, scale)
    return {"records": records, "agreement": agreement}


def scaling_fit(records) -> dict:
    """Per-method log-log exponent with a 95% confidence half-width."""
    out = {}
    for method in sorted({r.method for r in records}):
        pts = [(r.n, r.wall_seconds) for r in records if r.method == method and r.accepted]
        if len(pts) < 4:
            raise ValueError(f"need >= 4 accepted sizes for {method}, got {len(pts)}")
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        A = np.vstack([x, np.ones_like(x)]).T
        coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
        dof = len(x) - 2
        if dof > 0 and res.size:
            s2 = float(res[0]) / dof
            sx = float(np.sum((x - x.mean()) ** 2))
            half = 1.96 * np.sqrt(s2 / sx)
        else:
            half = float("nan")
        out[method] = {"exponent": float(coef[0]), "ci95_halfwidth": float(half)}
    return out


def kernel_bench(n: int = 400, repeats: int = 3, t: float = 1.0, gamma: float = 0.5) -> dict:
    """Numba kernel vs its pure-python fallback on the same QL workload.

    Uses the jitted function's ``py_func`` twin so both paths run in one
    process; when numba is disabled the two entries coincide.
    """
    _, d, e, _, _ = _workload(n, t, gamma)
    kern = _kernels.cs_tridiag_eigvals
    fallback = kern.py_func if NUMBA_ENABLED and hasattr(kern, "py_func") else kern
    kern(d, e)  # warm the jit cache

    def _time(fn):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(d, e)
            times.append(time.perf_counter() - t0)
        return median(times)

    t_jit = _time(kern)
    t_py = _time(fallback)
    return {
        "n": n,
        "numba_enabled": NUMBA_ENABLED,
        "jit_seconds": float(t_jit),
        "fallback_seconds": float(t_py),
        "speedup": float(t_py / t_jit) if t_jit > 0 else float("inf"),
    }


BENCH_COLUMNS = (
    "n", "method", "wall_seconds_median", "wall_seconds_iqr",
    "peak_mem_bytes", "max_residual",
)


def bench_rows(records) -> list[dict]:
    return [
        {
            "n": r.n,
            "method": r.method,
            "wall_seconds_median": r.wall_seconds,
            "wall_seconds_iqr": r.wall_seconds_iqr,
            "peak_mem_bytes": r.peak_mem_bytes,
            "max_residual": r.max_residual,
        }
        for r in records
    ]

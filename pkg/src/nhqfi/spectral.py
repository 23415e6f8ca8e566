"""Two-sided eigendecomposition with biorthogonal normalization.

Right vectors come from ``H``, left vectors from ``H^+``; pairs are matched
by conjugate eigenvalues, normalized to ``<L|R> = 1`` and gauge-fixed so the
largest-magnitude component of each right vector is real positive.  The
per-pair overlap condition ``|<l|r>|`` (unit-norm vectors) is the
EP-proximity measure: it is 1 for normal matrices and vanishes at an
exceptional point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import PairingError, RegimeError
from .model import BandedOperator, ChainSpec

EP_OVERLAP_FLOOR = 1e-8


@dataclass
class BiorthogonalEigensystem:
    """Spectrum with paired left/right eigenvectors.

    ``right_vectors[:, i]`` is unit-norm and gauge-fixed;
    ``left_vectors[:, i]`` satisfies ``<L_i|R_i> = 1`` except for
    EP-flagged pairs (``ep_degenerate[i]``), which are left unit-norm.
    ``overlap_cond[i] = |<l_i|r_i>|`` with both unit-norm;
    ``log10_overlap`` carries the same quantity in log10 (finite even when
    the overlap underflows).
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    overlap_cond: np.ndarray
    log10_overlap: np.ndarray
    ep_degenerate: np.ndarray
    gauge: str = "max-component-real-positive"
    backend: str = "dense"
    pairing: str = "conjugate-matched"

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def pair(self, i: int):
        return self.eigenvalues[i], self.right_vectors[:, i], self.left_vectors[:, i]

    def completeness_residual(self, vectors: np.ndarray) -> float:
        """max_v ||sum_n R_n <L_n|v> - v|| / ||v|| over the given columns."""
        V = np.atleast_2d(vectors.T).T
        coeff = self.left_vectors.conj().T @ V
        recon = self.right_vectors @ coeff
        num = np.linalg.norm(recon - V, axis=0)
        den = np.linalg.norm(V, axis=0)
        return float(np.max(num / den))

    def to_json_dict(self, include_vectors: bool = False) -> dict:
        out = {
            "eigenvalues": [[float(E.real), float(E.imag)] for E in self.eigenvalues],
            "overlap_cond": [float(x) for x in self.overlap_cond],
            "log10_overlap": [float(x) for x in self.log10_overlap],
            "ep_degenerate": [bool(x) for x in self.ep_degenerate],
            "gauge": self.gauge,
            "backend": self.backend,
        }
        if include_vectors:
            out["right_vectors"] = [
                [[float(z.real), float(z.imag)] for z in self.right_vectors[:, i]]
                for i in range(self.dim)
            ]
            out["left_vectors"] = [
                [[float(z.real), float(z.imag)] for z in self.left_vectors[:, i]]
                for i in range(self.dim)
            ]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(**kwargs))


def _spectral_sort(w: np.ndarray) -> np.ndarray:
    """Order by (Re, |Im|, Im): index 0 is the 'ground state'."""
    return np.lexsort((w.imag, np.abs(w.imag), w.real))


def _gauge_fix(r: np.ndarray) -> np.ndarray:
    """Unit norm, largest-|component| real positive; ties -> lowest index."""
    r = r / np.linalg.norm(r)
    mags = np.abs(r)
    top = mags.max()
    k = int(np.flatnonzero(mags >= top - 1e-12)[0])
    ph = r[k] / abs(r[k])
    return r / ph


def _log10_abs_dot(l: np.ndarray, r: np.ndarray) -> float:
    """log10 |<l|r>| robust against underflow of the direct dot product."""
    terms = np.conj(l) * r
    m = np.abs(terms).max()
    if m == 0.0:
        return float("-inf")
    s = np.sum(terms / m)
    if s == 0.0:
        return float("-inf")
    return float(np.log10(m) + np.log10(abs(s)))


def eig_biorthogonal(
    H: BandedOperator | np.ndarray,
    backend: str = "dense",
    pair_tol: float = 1e-8,
    ep_floor: float = EP_OVERLAP_FLOOR,
    strict_pairing: bool = False,
) -> BiorthogonalEigensystem:
    """Full biorthogonal eigensystem of ``H``.

    Parameters
    ----------
    H : BandedOperator or ndarray
    backend : str
        ``"dense"`` (LAPACK on the dense matrix, default) or ``"banded"``
        (balanced tridiagonal QL + inverse iteration; tridiagonal operators
        with well-separated spectra only).
    pair_tol : float
        Left/right eigenvalues are matched when
        ``|E_left - conj(E_right)| <= pair_tol * ||H||``.  Beyond that the
        two独立 decompositions cannot be trusted against each other (strongly
        non-normal matrices reach this wall); the left system is then taken
        from the inverse of the right eigenvector matrix instead, which is
        paired by construction (``pairing="inverse-fallback"``), or a
        :class:`PairingError` is raised when ``strict_pairing`` is set.
    ep_floor : float
        Pairs with unit-norm overlap below this are flagged EP-degenerate
        and skipped by the <L|R>=1 normalization.
    """
    op = H if isinstance(H, BandedOperator) else BandedOperator.from_dense(np.asarray(H, complex))
    scale = max(op.norm_estimate(), 1e-30)

    if backend == "banded":
        return _eig_banded(op, pair_tol, ep_floor)
    if backend != "dense":
        raise ValueError(f"unknown backend {backend!r}")

    M = op.to_dense()
    if np.all(M.imag == 0.0):
        # the real LAPACK driver preserves relative accuracy of the
        # exponentially graded eigenvector tails much further
        wr, Vr = np.linalg.eig(M.real)
        wl, Vl = np.linalg.eig(M.real.T)
    else:
        wr, Vr = np.linalg.eig(M)
        wl, Vl = np.linalg.eig(M.conj().T)
    wr = wr.astype(complex)
    wl = wl.astype(complex)
    Vr = Vr.astype(complex)
    Vl = Vl.astype(complex)

    order = _spectral_sort(wr)
    wr, Vr = wr[order], Vr[:, order]

    # greedy conjugate matching of left eigenvalues to the right spectrum
    n = len(wr)
    target = np.conj(wr)
    dist = np.abs(wl[None, :] - target[:, None])
    assign = np.full(n, -1)
    used = np.zeros(n, bool)
    flat_order = np.argsort(dist, axis=None, kind="stable")
    filled = 0
    for idx in flat_order:
        i, j = divmod(int(idx), n)
        if assign[i] >= 0 or used[j]:
            continue
        assign[i] = j
        used[j] = True
        filled += 1
        if filled == n:
            break
    worst = float(np.max(dist[np.arange(n), assign]))
    pairing = "conjugate-matched"
    if worst > pair_tol * scale:
        msg = (
            f"left/right eigenvalue matching ambiguous: worst conjugate "
            f"distance {worst:.3e} exceeds {pair_tol:.1e} * ||H|| = "
            f"{pair_tol * scale:.3e}"
        )
        if strict_pairing:
            raise PairingError(msg)
        import warnings as _w

        _w.warn(msg + "; taking left vectors from inv(V_right)", stacklevel=2)
        L = np.linalg.inv(Vr).conj().T
        pairing = "inverse-fallback"
    else:
        L = Vl[:, assign]

    return _assemble(wr, Vr, L, ep_floor, backend="dense", scale=scale,
                     pairing=pairing)


def _assemble(w, R, L, ep_floor, backend, scale, pairing="conjugate-matched"):
    n = len(w)
    Rg = np.empty_like(R)
    Lg = np.empty_like(L)
    oc = np.empty(n)
    log_oc = np.empty(n)
    ep = np.zeros(n, bool)
    for i in range(n):
        r = _gauge_fix(R[:, i])
        l = L[:, i] / np.linalg.norm(L[:, i])
        c = np.vdot(l, r)
        oc[i] = abs(c)
        log_oc[i] = _log10_abs_dot(l, r)
        Rg[:, i] = r
        if abs(c) < ep_floor:
            ep[i] = True
            Lg[:, i] = l
        else:
            Lg[:, i] = l / np.conj(c)

    # enforce biorthonormality inside near-degenerate clusters
    gap_tol = 1e-10 * scale
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(w[j] - w[j - 1]) < gap_tol:
            j += 1
        if j - i > 1 and not ep[i:j].any():
            O = Lg[:, i:j].conj().T @ Rg[:, i:j]
            sv = np.linalg.svd(O, compute_uv=False)
            if sv[-1] > 1e3 * ep_floor:
                Lg[:, i:j] = Lg[:, i:j] @ np.linalg.inv(O).conj().T
            else:
                ep[i:j] = True
        i = j

    return BiorthogonalEigensystem(
        eigenvalues=w,
        right_vectors=Rg,
        left_vectors=Lg,
        overlap_cond=oc,
        log10_overlap=log_oc,
        ep_degenerate=ep,
        backend=backend,
        pairing=pairing,
    )


# -- banded (specialized) path ----------------------------------------------


def balance_tridiagonal(op: BandedOperator):
    """Complex symmetric form of a tridiagonal operator.

    A diagonal similarity maps T(diag d, upper u, lower l) to the complex
    symmetric tridiagonal with off-diagonal ``e = sqrt(u*l)``; this requires
    every product ``u_i * l_i`` to be nonzero.  For NHSE chains the entries
    span ``exp(+-kappa N)``, so balancing is what keeps the eigenvalue
    problem well-conditioned.
    """
    d, u, lo = op.tridiagonal()
    prod = np.asarray(u, complex) * np.asarray(lo, complex)
    if np.any(prod == 0):
        raise ValueError("balancing requires nonzero u_i * l_i on every bond")
    return d.astype(complex), np.sqrt(prod)


def banded_eigvalues(op: BandedOperator, max_iter: int = 80) -> np.ndarray:
    """All eigenvalues via balanced tridiagonal QL.

    Dispatches to the real-arithmetic kernel when the balanced form is real
    (NHSE and Hermitian chains).  Raises ``RuntimeError`` if any eigenvalue
    fails to converge; callers may then fall back to the dense route.
    """
    d, e = balance_tridiagonal(op)
    if np.all(d.imag == 0.0) and np.all(e.imag == 0.0):
        w, nfail = _kernels.rs_tridiag_eigvals(
            np.ascontiguousarray(d.real), np.ascontiguousarray(e.real), max_iter
        )
        w = w.astype(complex)
    else:
        w, nfail = _kernels.cs_tridiag_eigvals(d, e, max_iter)
    if nfail:
        raise RuntimeError(f"QL iteration failed to converge for {nfail} eigenvalues")
    return w


def banded_eigvector(op: BandedOperator, lam: complex, side: str = "right",
                     iters: int = 3, seed: int = 7) -> np.ndarray:
    """Eigenvector by inverse iteration on the tridiagonal operator."""
    d, u, lo = op.tridiagonal()
    if side == "left":
        d, u, lo = d.conj(), lo.conj(), u.conj()
        lam = np.conj(lam)
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
    return _kernels.inverse_iteration(
        d.astype(complex), u.astype(complex), lo.astype(complex),
        complex(lam), x0, iters,
    )


def _balancing_log_factors(op: BandedOperator) -> np.ndarray:
    """log D_j of the diagonal similarity D T D^-1 = (complex symmetric)."""
    _, u, lo = op.tridiagonal()
    ratio = np.asarray(u, complex) / np.asarray(lo, complex)
    logd = np.zeros(op.dim, complex)
    logd[1:] = np.cumsum(0.5 * np.log(ratio))
    return logd


def _eig_banded(op: BandedOperator, pair_tol: float, ep_floor: float):
    """Banded eigensystem: QL eigenvalues + inverse iteration on the
    balanced complex-symmetric form, mapped back through the balancing
    similarity in log space (R = D^-1 v, L = D conj(v))."""
    scale = max(op.norm_estimate(), 1e-30)
    d, e = balance_tridiagonal(op)
    w = banded_eigvalues(op)
    order = _spectral_sort(w)
    w = w[order]
    n = op.dim
    logd = _balancing_log_factors(op)
    R = np.empty((n, n), complex)
    L = np.empty((n, n), complex)
    rng = np.random.default_rng(7)
    for i in range(n):
        x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = _kernels.inverse_iteration(d, e, e, complex(w[i]), x0, 3)
        with np.errstate(divide="ignore"):
            logv = np.log(np.abs(v) + 0j) + 1j * np.angle(v)
        for sgn, out in ((-1.0, R), (+1.0, L)):
            lv = logv + sgn * logd
            if sgn > 0:
                lv = np.conj(logv) + logd  # conj(v) scaled by D
            shift = np.max(lv.real)
            vec = np.exp(lv - shift)
            out[:, i] = vec / np.linalg.norm(vec)
    return _assemble(w, R, L, ep_floor, backend="banded", scale=scale)


# -- analytic skin modes ------------------------------------------------------


@dataclass(frozen=True)
class SkinModePair:
    """Idealized exponential skin-mode pair ``psi_R ~ e^{-k j}, psi_L ~ e^{+k j}``."""

    kappa: float
    n: int
    psi_r: np.ndarray
    psi_l: np.ndarray
    overlap_sq_direct: float
    overlap_sq_exact: float
    log_overlap_sq_direct: float
    log_overlap_sq_exact: float

    @property
    def exact_to_direct_ratio(self) -> float:
        """The closed form is smaller than the direct value by N^2 e^{2 kappa}."""
        return math.exp(self.log_overlap_sq_exact - self.log_overlap_sq_direct)


def skin_modes(kappa: float, n: int) -> SkinModePair:
    """Unit-normalized ``e^{-+kappa j}`` profiles and their biorthogonal overlap.

    ``overlap_sq_direct`` is ``|sum_j conj(l_j) r_j|^2`` by direct summation
    of the unit-norm profiles.  ``overlap_sq_exact`` evaluates the closed
    form ``(1-e^{-2k})^2 / ((1-e^{-2kN})(e^{2kN}-1))``, which differs from
    the direct value by the factor ``N^2 e^{2 kappa}`` (it drops the N^2
    from the unnormalized inner product and one e^{2 kappa} from the norm
    prefactors); both are reported so the discrepancy stays visible.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(1, n + 1)
    r = np.exp(-kappa * (j - 1))
    r /= np.linalg.norm(r)
    l = np.exp(kappa * (j - n))
    l /= np.linalg.norm(l)

    direct = abs(np.sum(l * r)) ** 2  # profiles are real

    # log-domain forms (exp(-2*kappa*n) underflows harmlessly to 0 in log1p)
    log_norm_sq = math.log1p(-math.exp(-2 * kappa * n)) - math.log1p(-math.exp(-2 * kappa))
    log_cross = math.log(n) - kappa * (n - 1)
    log_direct = 2 * (log_cross - log_norm_sq)

    log_exact = (
        2 * math.log1p(-math.exp(-2 * kappa))
        - 2 * math.log1p(-math.exp(-2 * kappa * n))
        - 2 * kappa * n
    )
    exact = math.exp(log_exact) if log_exact > -700 else 0.0

    return SkinModePair(
        kappa=float(kappa),
        n=int(n),
        psi_r=r,
        psi_l=l,
        overlap_sq_direct=float(direct),
        overlap_sq_exact=float(exact),
        log_overlap_sq_direct=float(log_direct),
        log_overlap_sq_exact=float(log_exact),
    )


@dataclass(frozen=True)
class LocalizationExponents:
    """The two localization-exponent conventions for skin physics."""

    kappa_arccosh: float | None
    kappa_hn: float | None
    notes: tuple = ()


def localization_exponents(
    spec: ChainSpec | None = None,
    *,
    t: float | None = None,
    g: float = 0.0,
    gamma: float | None = None,
) -> LocalizationExponents:
    """``arccosh(|g|/t)`` (defined only for |g| > t) and the Hatano-Nelson
    exponent ``ln sqrt((t+gamma)/(t-gamma))`` (defined for 0 <= gamma < t)."""
    if spec is not None:
        t = spec.t
        gamma = spec.gamma
        g = spec.g
    if t is None or gamma is None:
        raise ValueError("pass a spec or both t and gamma")
    notes = []
    ka = None
    if abs(g) > t:
        ka = float(np.arccosh(abs(g) / t))
    else:
        notes.append("kappa_arccosh undefined: requires |g| > t")
    kh = None
    if 0 <= gamma < t:
        kh = float(np.log(np.sqrt((t + gamma) / (t - gamma))))
    else:
        notes.append(f"kappa_hn undefined: gamma={gamma} outside [0, t)")
    return LocalizationExponents(kappa_arccosh=ka, kappa_hn=kh, notes=tuple(notes))


def participation_ratio(v: np.ndarray) -> float:
    """``(sum_j |v_j|^4)^{-1}`` on the unit-normalized vector."""
    v = np.asarray(v)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("participation ratio undefined for the zero vector")
    p4 = np.sum(np.abs(v / nrm) ** 4)
    return float(1.0 / p4)


# -- level statistics ---------------------------------------------------------


@dataclass(frozen=True)
class LevelSpacings:
    spacings: np.ndarray  # sorted, normalized to unit mean
    ks_goe: float
    ks_poisson: float


def goe_density(s):
    """Wigner surmise (pi s / 2) exp(-pi s^2 / 4)."""
    s = np.asarray(s, float)
    return (np.pi * s / 2.0) * np.exp(-np.pi * s * s / 4.0)


def poisson_density(s):
    s = np.asarray(s, float)
    return np.exp(-s)


def _goe_cdf(s):
    return 1.0 - np.exp(-np.pi * np.asarray(s, float) ** 2 / 4.0)


def _poisson_cdf(s):
    return 1.0 - np.exp(-np.asarray(s, float))


def level_spacings(eigenvalues, tol_imag: float = 1e-10) -> LevelSpacings:
    """Mean-normalized nearest-neighbor spacings of a real spectrum.

    Complex input (any |Im E| above ``tol_imag`` times the spectral scale)
    is refused: spacing statistics are only defined in the unbroken regime.
    """
    from scipy.stats import kstest

    w = np.asarray(eigenvalues)
    scale = max(np.max(np.abs(w)), 1e-30)
    if np.max(np.abs(np.imag(w))) > tol_imag * scale:
        raise RegimeError(
            "complex spectrum: level spacing statistics require the "
            "unbroken (fully real) regime"
        )
    e = np.sort(np.real(w))
    s = np.diff(e)
    s = s[s > 0] if np.any(s > 0) else s
    s = s / np.mean(s)
    ks_g = float(kstest(s, _goe_cdf).statistic)
    ks_p = float(kstest(s, _poisson_cdf).statistic)
    return LevelSpacings(spacings=np.sort(s), ks_goe=ks_g, ks_poisson=ks_p)


# -- EP diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class EpPairReport:
    index_a: int
    index_b: int
    gap: float
    coalescence: float  # 1 - |<R_a|R_b>| with unit-norm right vectors
    overlap_cond_a: float
    overlap_cond_b: float
    is_ep: bool


def ep_proximity(
    es: BiorthogonalEigensystem,
    window: float | None = None,
    ep_tol: float = 1e-6,
) -> list[EpPairReport]:
    """Near-coalescing eigenvalue pairs and their eigenvector angles.

    A pair is flagged as a second-order EP when gap and eigenvector angle
    both fall below ``ep_tol``.  A Hermitian (diabolic) degeneracy keeps
    orthogonal eigenvectors, so its coalescence measure stays ~1 and it is
    not flagged.
    """
    w = es.eigenvalues
    scale = max(np.max(np.abs(w)), 1.0)
    if window is None:
        window = 1e-3 * scale
    out = []
    for a in range(len(w)):
        for b in range(a + 1, len(w)):
            gap = abs(w[a] - w[b])
            if gap > window:
                continue
            ov = abs(np.vdot(es.right_vectors[:, a], es.right_vectors[:, b]))
            coal = 1.0 - min(ov, 1.0)
            out.append(
                EpPairReport(
                    index_a=a,
                    index_b=b,
                    gap=float(gap),
                    coalescence=float(coal),
                    overlap_cond_a=float(es.overlap_cond[a]),
                    overlap_cond_b=float(es.overlap_cond[b]),
                    is_ep=bool(gap < ep_tol * scale and coal < ep_tol),
                )
            )
    return out

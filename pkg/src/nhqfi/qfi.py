"""Single-parameter quantum Fisher information for chain eigenstates.

Three routes are implemented:

* ``qfi_finite_diff`` -- central differences of the gauge-aligned
  biorthonormal pair, ``F = 4 [Re<dL|dR> - |<L|dR>|^2]``.
* ``qfi_pert_sum`` -- biorthogonal perturbation theory.  The double sum is
  evaluated together with the norm-gauge cross term ``2 a^2``
  (``a = Re <r0| dR_pert>``), which is what makes the perturbative value
  agree with the finite-difference one: the FD route works with unit-norm
  right vectors while the bare perturbative expansion does not preserve the
  norm, and the QFI form above is invariant only under norm-preserving
  (phase) gauge motions.
* closed forms for the skin-effect suppression law, the EP enhancement law,
  its exact finite-N Dicke sum, and the braiding protocol.

Values are stored signed: for non-Hermitian chains the eigenstate QFI can
be negative (the cross term dominates near strong non-normality), which the
toolkit reports rather than hides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChainSpecError, ExceptionalPointError, RegimeError
from .model import BandedOperator, ChainSpec, build_chain
from .spectral import BiorthogonalEigensystem, eig_biorthogonal

PARAMETERS = ("mu", "phi", "g", "gamma", "t", "delta")

_OVERLAP_PRECONDITION = 1e-6


@dataclass(frozen=True)
class QfiEstimate:
    """A QFI value with its provenance.

    ``value`` may be negative for non-Hermitian chains; ``log10_value`` is
    log10 |value| (finite even when the linear value underflows, for the
    analytic skin-effect law), with ``sign`` carrying the sign.
    """

    value: float
    parameter: str
    method: str
    step: float | None = None
    state_index: int = 0
    converged: bool = True
    log10_value: float | None = None
    sign: int = 1
    extras: dict | None = None


# -- exact parameter-derivative matrices --------------------------------------


def _hop_patterns(n: int):
    fwd = np.zeros((n, n), complex)
    bwd = np.zeros((n, n), complex)
    for j in range(n - 1):
        fwd[j, j + 1] = 1.0
        bwd[j + 1, j] = 1.0
    return fwd, bwd


def param_generator(spec: ChainSpec, parameter: str) -> np.ndarray:
    """Exact ``dH/d(parameter)`` as a dense matrix matching ``build_chain``."""
    if parameter not in PARAMETERS:
        raise ValueError(f"unknown parameter {parameter!r}")
    n = spec.n
    stag = (-1.0) ** np.arange(1, n + 1)
    fwd, bwd = _hop_patterns(n)
    hop = spec.t * np.exp(1j * spec.phi) if spec.kind == "multiparam" else spec.t + 0j

    if spec.kind == "nhse":
        if parameter == "gamma":
            return fwd - bwd
        if parameter == "t":
            return fwd + bwd
        raise ChainSpecError(f"nhse chain has no parameter {parameter!r}")

    dh = np.zeros((n, n), complex)
    dD = None
    if parameter == "mu":
        dh = -np.eye(n, dtype=complex)
    elif parameter == "g":
        if spec.kind not in ("pt", "multiparam"):
            raise ChainSpecError(f"{spec.kind} chain has no parameter 'g'")
        dh = 1j * np.diag(stag).astype(complex)
    elif parameter == "phi":
        if spec.kind != "multiparam":
            raise ChainSpecError(f"{spec.kind} chain has no parameter 'phi'")
        dh = 1j * hop * fwd - 1j * np.conj(hop) * bwd
    elif parameter == "t":
        ph = np.exp(1j * spec.phi) if spec.kind == "multiparam" else 1.0
        dh = ph * fwd + np.conj(ph) * bwd
    elif parameter == "gamma":
        raise ChainSpecError(f"{spec.kind} chain has no parameter 'gamma'")
    elif parameter == "delta":
        if spec.delta == 0.0:
            raise ChainSpecError(
                "parameter 'delta' requires delta > 0 (doubling changes the dimension)"
            )
        dD = fwd - bwd

    if spec.delta == 0.0:
        return dh

    if dD is None:
        dD = np.zeros((n, n), complex)
    dH = np.zeros((2 * n, 2 * n), complex)
    dH[:n, :n] = dh
    dH[:n, n:] = dD
    dH[n:, :n] = -dD.conj()
    dH[n:, n:] = -dh.T
    return dH


def _is_linear_parameter(spec: ChainSpec, parameter: str) -> bool:
    return parameter != "phi"


def _matrix_at(spec: ChainSpec, parameter: str, value: float,
               H0: np.ndarray, dH: np.ndarray) -> np.ndarray:
    """H at a shifted parameter value, bypassing range validation.

    All parameters except ``phi`` enter the matrix linearly, so
    ``H0 + (value - theta0) dH`` is exact and also well-defined slightly
    outside the physical parameter range (needed for central differences
    at a range boundary such as g = 0).
    """
    theta0 = getattr(spec, parameter)
    if _is_linear_parameter(spec, parameter):
        return H0 + (value - theta0) * dH
    return build_chain(spec.with_(**{parameter: value})).to_dense()


# -- state selection and alignment --------------------------------------------


def _select_state(es: BiorthogonalEigensystem, state_index: int | None) -> int:
    return 0 if state_index is None else int(state_index)


def _match_state(es: BiorthogonalEigensystem, r0: np.ndarray) -> int:
    ov = np.abs(es.right_vectors.conj().T @ r0)
    return int(np.argmax(ov))


def _aligned_pair(es: BiorthogonalEigensystem, idx: int, r_ref: np.ndarray):
    """Pair (r, l) rephased so <r_ref|r> is real positive; <l|r> stays 1."""
    r = es.right_vectors[:, idx]
    l = es.left_vectors[:, idx]
    ov = np.vdot(r_ref, r)
    if ov == 0:
        return r, l
    ph = ov / abs(ov)
    return r / ph, l / ph


def _check_overlap(es: BiorthogonalEigensystem, idx: int, where: str):
    if es.ep_degenerate[idx] or es.overlap_cond[idx] < _OVERLAP_PRECONDITION:
        raise ExceptionalPointError(
            f"eigenpair {idx} is EP-degenerate {where} "
            f"(overlap_cond = {es.overlap_cond[idx]:.3e}); QFI refused"
        )


# -- finite differences --------------------------------------------------------


def qfi_finite_diff(
    spec: ChainSpec,
    parameter: str,
    step: float | None = None,
    state_index: int | None = None,
    base_phase: complex = 1.0,
) -> QfiEstimate:
    """Biorthogonal QFI by central differences.

    The perturbed right vectors are rephased to maximize the real part of
    their overlap with the base-point right vector before differencing; the
    left vectors carry the same phase so every pair stays biorthonormal.
    A step-halving (Richardson) check marks the estimate non-converged when
    the value moves by more than 1% between ``h`` and ``h/2``.

    ``base_phase`` multiplies the base pair by a unit phase before
    differencing; the result is phase-gauge invariant, and this hook lets
    tests verify it.
    """
    H0op = build_chain(spec)
    H0 = H0op.to_dense()
    dH = param_generator(spec, parameter)
    theta0 = float(getattr(spec, parameter))
    h = step if step is not None else 1e-5 * max(abs(theta0), 1.0)

    es0 = eig_biorthogonal(H0op)
    idx0 = _select_state(es0, state_index)
    _check_overlap(es0, idx0, "at the base point")
    ph = base_phase / abs(base_phase)
    r0 = es0.right_vectors[:, idx0] * ph
    l0 = es0.left_vectors[:, idx0] * ph

    def value_at(hh: float) -> float:
        pert = {}
        for sgn in (+1, -1):
            Hs = _matrix_at(spec, parameter, theta0 + sgn * hh, H0, dH)
            es = eig_biorthogonal(Hs)
            k = _match_state(es, r0)
            _check_overlap(es, k, f"at {parameter} = {theta0 + sgn * hh:g}")
            pert[sgn] = _aligned_pair(es, k, r0)
        dR = (pert[1][0] - pert[-1][0]) / (2 * hh)
        dL = (pert[1][1] - pert[-1][1]) / (2 * hh)
        return float(4.0 * (np.vdot(dL, dR).real - abs(np.vdot(l0, dR)) ** 2))

    f_h = value_at(h)
    f_h2 = value_at(h / 2)
    denom = max(abs(f_h2), 1e-300)
    converged = abs(f_h2 - f_h) <= 0.01 * denom
    return QfiEstimate(
        value=f_h2,
        parameter=parameter,
        method="finite_diff",
        step=h / 2,
        state_index=idx0,
        converged=converged,
        sign=int(np.sign(f_h2)) or 1,
    )


# -- perturbative sum ----------------------------------------------------------


def qfi_pert_sum(
    spec: ChainSpec,
    parameter: str,
    state_index: int | None = None,
) -> QfiEstimate:
    """Biorthogonal perturbative QFI.

    ``F = 4 [ Re sum_{n != 0} <L0|dH|Rn><Ln|dH|R0> / (En - E0)^2 - 2 a^2 ]``
    with ``a = Re sum_n <r0|Rn><Ln|dH|r0>/(E0 - En)`` the norm-gauge cross
    term.  For Hermitian input ``a = 0`` and the double sum reduces to the
    standard ``4 sum |<n|dH|0>|^2/(En-E0)^2``.
    """
    H0op = build_chain(spec)
    dH = param_generator(spec, parameter)
    es = eig_biorthogonal(H0op)
    idx0 = _select_state(es, state_index)
    _check_overlap(es, idx0, "at the base point")

    w = es.eigenvalues
    scale = max(np.max(np.abs(w)), 1e-30)
    gaps = np.abs(w - w[idx0])
    gaps[idx0] = np.inf
    if np.min(gaps) < 1e-8 * scale:
        raise RegimeError(
            f"near-degenerate spectrum around state {idx0} "
            f"(min gap {np.min(gaps):.3e}); perturbative sum refused"
        )

    r0 = es.right_vectors[:, idx0]
    l0 = es.left_vectors[:, idx0]
    dH_r0 = dH @ r0
    S = 0.0 + 0j
    a = 0.0 + 0j
    for n in range(es.dim):
        if n == idx0:
            continue
        Mn0 = np.vdot(es.left_vectors[:, n], dH_r0)
        M0n = np.vdot(l0, dH @ es.right_vectors[:, n])
        dE = w[n] - w[idx0]
        S += M0n * Mn0 / (dE * dE)
        a += np.vdot(r0, es.right_vectors[:, n]) * Mn0 / (-dE)
    a_r = a.real
    value = float(4.0 * (S.real - 2.0 * a_r * a_r))
    return QfiEstimate(
        value=value,
        parameter=parameter,
        method="pert_sum",
        state_index=idx0,
        sign=int(np.sign(value)) or 1,
    )


def qfi_hermitian_standard(
    spec: ChainSpec,
    parameter: str,
    step: float | None = None,
    state_index: int | None = None,
) -> QfiEstimate:
    """Standard pure-state QFI ``4[<dv|dv> - |<v|dv>|^2]`` via ``eigh``.

    Only valid for Hermitian specs; the reference the biorthogonal routes
    must reduce to when g = gamma = 0.
    """
    H0op = build_chain(spec)
    if not H0op.is_hermitian:
        raise ChainSpecError("qfi_hermitian_standard requires a Hermitian chain")
    H0 = H0op.to_dense()
    dH = param_generator(spec, parameter)
    theta0 = float(getattr(spec, parameter))
    h = step if step is not None else 1e-5 * max(abs(theta0), 1.0)
    idx = 0 if state_index is None else int(state_index)

    w0, V0 = np.linalg.eigh(H0)
    v0 = V0[:, idx]

    def vec_at(val: float) -> np.ndarray:
        Hs = _matrix_at(spec, parameter, val, H0, dH)
        w, V = np.linalg.eigh((Hs + Hs.conj().T) / 2.0)
        k = int(np.argmax(np.abs(V.conj().T @ v0)))
        v = V[:, k]
        ov = np.vdot(v0, v)
        return v / (ov / abs(ov))

    vp = vec_at(theta0 + h)
    vm = vec_at(theta0 - h)
    dv = (vp - vm) / (2 * h)
    value = float(4.0 * (np.vdot(dv, dv).real - abs(np.vdot(v0, dv)) ** 2))
    return QfiEstimate(
        value=value, parameter=parameter, method="hermitian_standard",
        step=h, state_index=idx,
    )


# -- closed forms --------------------------------------------------------------


def qfi_nhse_analytic(n: int, kappa: float, t: float = 1.0) -> QfiEstimate:
    """Skin-effect suppression law ``F = 4 n^3 e^{-2 kappa n} / (3 t^2 sinh^2 kappa)``.

    Returned in log space as well (the linear value underflows for
    ``kappa * n`` beyond ~350); ``extras['ratio_to_sql_log10']`` carries
    ``log10(F/n)``.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    ln_f = math.log(4.0) + 3.0 * math.log(n) - 2.0 * kappa * n \
        - math.log(3.0 * t * t * math.sinh(kappa) ** 2)
    log10_f = ln_f / math.log(10.0)
    value = math.exp(ln_f) if ln_f > -700 else 0.0
    return QfiEstimate(
        value=value,
        parameter="gamma",
        method="analytic_nhse",
        log10_value=log10_f,
        extras={"ratio_to_sql_log10": log10_f - math.log10(n)},
    )


def qfi_nhse_supplement_form(n: int, kappa: float) -> QfiEstimate:
    """Alternate suppression law ``F = n^2 e^{-2 kappa n}``.

    The prefactor disagrees with :func:`qfi_nhse_analytic`; both are
    exposed, and only the exponential rate is treated as trustworthy.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    ln_f = 2.0 * math.log(n) - 2.0 * kappa * n
    return QfiEstimate(
        value=math.exp(ln_f) if ln_f > -700 else 0.0,
        parameter="gamma",
        method="analytic_nhse",
        log10_value=ln_f / math.log(10.0),
        extras={"form": "n^2 exp(-2 kappa n)"},
    )


def qfi_ep_analytic(n: int, t: float, delta: float, tau: float = 1.0) -> QfiEstimate:
    """EP enhancement law ``F = tau^2 t n^2 / (6 delta)``; ``eta = F/n``."""
    if delta <= 0:
        raise ValueError("delta (detuning) must be positive")
    value = tau * tau * t * n * n / (6.0 * delta)
    return QfiEstimate(
        value=value,
        parameter="g",
        method="analytic_ep",
        extras={"enhancement": value / n},
    )


def qfi_ep_dicke_sum(n: int, t: float, delta: float, tau: float = 1.0) -> QfiEstimate:
    """Exact finite-N Dicke-state QFI, no large-N approximation.

    Computed from the two sums ``sum k^2`` and ``(sum k)^2`` over
    ``k = 0..n`` directly; equals ``tau^2 t n (n+2) / (6 delta)``, i.e.
    ``(1 + 2/n)`` times the large-N law.
    """
    if delta <= 0:
        raise ValueError("delta (detuning) must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(0, n + 1, dtype=float)
    first = tau * tau * t / (2.0 * delta * (n + 1)) * float(np.sum(k * k))
    cross = tau * tau * t / (2.0 * delta * (n + 1) ** 2) * float(np.sum(k)) ** 2
    value = 4.0 * (first - cross)
    return QfiEstimate(
        value=value,
        parameter="g",
        method="analytic_ep",
        extras={"ratio_to_large_n": value / qfi_ep_analytic(n, t, delta, tau).value},
    )


def qfi_braid_analytic(n: int, epsilon_pert: float, tau: float) -> QfiEstimate:
    """Braiding-protocol QFI ``F = n^2 tau^2 / (4 epsilon)``.

    ``extras`` carries the optimal operating point ``tau* = 1/n``,
    ``eps* = 1/(4 n^2)`` at which ``F* = n^2``.
    """
    if epsilon_pert <= 0 or tau <= 0:
        raise ValueError("epsilon_pert and tau must be positive")
    value = n * n * tau * tau / (4.0 * epsilon_pert)
    return QfiEstimate(
        value=value,
        parameter="g",
        method="analytic_braid",
        extras={"tau_star": 1.0 / n, "eps_star": 1.0 / (4.0 * n * n),
                "f_star": float(n * n)},
    )


# -- NHSE numeric sweep --------------------------------------------------------


@dataclass(frozen=True)
class NhseQfiRecord:
    n: int
    overlap_sq: float
    log_overlap_sq: float
    qfi_biorthonormal: float
    qfi_overlap_weighted: float
    log_abs_qfi_weighted: float


def _qfi_fd_overlap_damped(H0: np.ndarray, dH: np.ndarray, h: float):
    """Overlap-squared-damped biorthonormal QFI of the ground pair.

    ``F_supp = oc^2 * F_{<L|R>=1}`` evaluated through unit-norm quantities
    only: with ``c = <l|r>`` (unit-norm vectors) the damping cancels the
    1/overlap amplification analytically,

        F_supp = 4 [ Re{ conj(c) (<dl|dr> - (dc/c) <l|dr>) } - |<l|dr>|^2 ],

    so the computation stays well-conditioned however small the overlap is
    (no exponentially large left vectors are ever formed).  All derivatives
    are central differences of phase-aligned unit-norm families.
    """
    es0 = eig_biorthogonal(H0)
    r0 = es0.right_vectors[:, 0]
    l0 = es0.left_vectors[:, 0]
    l0 = l0 / np.linalg.norm(l0)
    c0 = np.vdot(l0, r0)
    pert = {}
    for sgn in (+1, -1):
        es = eig_biorthogonal(H0 + sgn * h * dH)
        k = _match_state(es, r0)
        r = es.right_vectors[:, k]
        l = es.left_vectors[:, k]
        l = l / np.linalg.norm(l)
        phr = np.vdot(r0, r)
        r = r / (phr / abs(phr))
        phl = np.vdot(l0, l)
        l = l / (phl / abs(phl))
        pert[sgn] = (r, l, np.vdot(l, r))
    dR = (pert[1][0] - pert[-1][0]) / (2 * h)
    dL = (pert[1][1] - pert[-1][1]) / (2 * h)
    dc = (pert[1][2] - pert[-1][2]) / (2 * h)
    l_dr = np.vdot(l0, dR)
    term = np.conj(c0) * (np.vdot(dL, dR) - (dc / c0) * l_dr)
    f_supp = float(4.0 * (term.real - abs(l_dr) ** 2))
    return f_supp, float(es0.overlap_cond[0]), float(es0.log10_overlap[0])


def nhse_numeric_sweep(
    t: float,
    gamma: float,
    n_list,
    step: float = 1e-6,
) -> list[NhseQfiRecord]:
    """Ground-pair overlap and gamma-QFI of asymmetric-hopping chains vs n.

    ``qfi_biorthonormal`` is the <L|R>=1 convention value (polynomial in n;
    exposed for honesty; NaN where the EP-floor precondition refuses it).
    ``qfi_overlap_weighted`` is the same formula damped by the squared
    biorthogonal overlap, evaluated in the numerically stable factored form
    (see ``_qfi_fd_overlap_damped``); its log-slope reproduces the
    exponential suppression rate ``2 kappa_hn`` up to a polynomial
    prefactor drift.
    """
    out = []
    for n in n_list:
        spec = ChainSpec(n=int(n), t=t, gamma=gamma, kind="nhse")
        H0 = build_chain(spec).to_dense()
        dH = param_generator(spec, "gamma")
        f_weighted, oc, log10_oc = _qfi_fd_overlap_damped(H0, dH, step)
        log_abs_w = math.log(abs(f_weighted)) if f_weighted != 0 else float("-inf")
        try:
            f_biorth = qfi_finite_diff(spec, "gamma", step=step).value
        except ExceptionalPointError:
            f_biorth = float("nan")
        out.append(
            NhseQfiRecord(
                n=int(n),
                overlap_sq=oc * oc,
                log_overlap_sq=2.0 * math.log(10.0) * log10_oc,
                qfi_biorthonormal=f_biorth,
                qfi_overlap_weighted=f_weighted,
                log_abs_qfi_weighted=log_abs_w,
            )
        )
    return out


def fit_rate_vs_n(n_list, log_values) -> float:
    """Slope magnitude of a log-linear decay, ``log y = c - rate * n``."""
    n_arr = np.asarray(n_list, float)
    y = np.asarray(log_values, float)
    keep = np.isfinite(y)
    slope = np.polyfit(n_arr[keep], y[keep], 1)[0]
    return float(-slope)


# -- sweep CSV -----------------------------------------------------------------

SWEEP_COLUMNS = ("parameter", "value", "n", "method", "qfi_or_log_qfi", "step", "converged")


def sweep_rows(estimates, specs) -> list[dict]:
    """Flatten (estimate, spec) pairs into sweep CSV rows."""
    rows = []
    for est, spec in zip(estimates, specs):
        qfi = est.log10_value if est.log10_value is not None and est.value == 0.0 else est.value
        rows.append(
            {
                "parameter": est.parameter,
                "value": float(getattr(spec, est.parameter)),
                "n": spec.n,
                "method": est.method,
                "qfi_or_log_qfi": qfi,
                "step": est.step if est.step is not None else "",
                "converged": est.converged,
            }
        )
    return rows

"""Chain Hamiltonians as complex banded operators.

Four model kinds are supported, all on an open chain of ``n`` sites:

``hermitian``
    tight-binding + real pairing, ``sum_j t(c^+_j c_{j+1} + h.c.)
    + delta(c^+_j c^+_{j+1} + h.c.) - mu n_j``.  Nambu-doubled to a 2n x 2n
    single-particle matrix when ``delta != 0``.
``nhse``
    asymmetric hopping, ``(t+gamma)`` forward and ``(t-gamma)`` backward,
    zero onsite energy (Hatano-Nelson type).
``pt``
    the hermitian chain plus a staggered imaginary potential
    ``i g (-1)^j n_j`` (balanced gain/loss).
``multiparam``
    Peierls-phased hopping ``t e^{i phi}``, diagonal ``-mu + i g (-1)^j``
    and pairing ``delta``; the model used for joint (mu, phi, g) estimation.

Site index ``j`` runs from 1 to n, so the staggered sign on the first site
is ``(-1)^1 = -1``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ChainSpecError

KINDS = ("hermitian", "nhse", "pt", "multiparam")

_SPEC_KEYS = ("n", "t", "delta", "mu", "phi", "g", "gamma", "kind")


@dataclass(frozen=True)
class ChainSpec:
    """All model parameters; the single source of truth for construction.

    Attributes
    ----------
    n : int
        Site count, >= 1.
    t : float
        Hopping amplitude, > 0.
    delta : float
        Pairing potential, >= 0.  Nonzero values Nambu-double the matrix.
    mu : float
        Chemical potential (enters the diagonal as ``-mu``).
    phi : float
        Peierls phase in radians (``multiparam`` only).
    g : float
        Gain/loss strength, >= 0 (``pt`` / ``multiparam``).
    gamma : float
        Hopping asymmetry, 0 <= gamma < t (``nhse``).
    kind : str
        One of ``hermitian``, ``nhse``, ``pt``, ``multiparam``.
    """

    n: int
    t: float = 1.0
    delta: float = 0.0
    mu: float = 0.0
    phi: float = 0.0
    g: float = 0.0
    gamma: float = 0.0
    kind: str = "hermitian"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ChainSpecError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise ChainSpecError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.t > 0:
            raise ChainSpecError(f"t must be positive, got {self.t}")
        if self.delta < 0:
            raise ChainSpecError(f"delta must be >= 0, got {self.delta}")
        if self.gamma < 0:
            raise ChainSpecError(f"gamma must be >= 0, got {self.gamma}")
        if self.kind == "nhse":
            if self.gamma >= self.t:
                raise ChainSpecError(
                    f"nhse requires gamma < t for normalizable skin modes "
                    f"(gamma={self.gamma}, t={self.t})"
                )
            for name in ("delta", "g", "phi", "mu"):
                if getattr(self, name) != 0.0:
                    raise ChainSpecError(f"nhse chain does not take {name} != 0")
        if self.kind in ("pt", "multiparam"):
            if self.g < 0:
                raise ChainSpecError(f"{self.kind} requires g >= 0, got {self.g}")
            if self.gamma != 0.0:
                raise ChainSpecError(f"{self.kind} chain does not take gamma != 0")
        if self.kind == "pt" and self.phi != 0.0:
            raise ChainSpecError("pt chain does not take phi != 0 (use multiparam)")
        if self.kind == "hermitian":
            for name in ("g", "gamma", "phi"):
                if getattr(self, name) != 0.0:
                    raise ChainSpecError(f"hermitian chain does not take {name} != 0")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in _SPEC_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_config(self) -> str:
        """Flat ``key=value`` representation, one key per line."""
        return "\n".join(f"{k}={getattr(self, k)}" for k in _SPEC_KEYS) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ChainSpec":
        unknown = set(data) - set(_SPEC_KEYS)
        if unknown:
            raise ChainSpecError(f"unknown ChainSpec keys: {sorted(unknown)}")
        if "n" not in data:
            raise ChainSpecError("ChainSpec requires key 'n'")
        kwargs = {}
        for k, v in data.items():
            if k == "kind":
                kwargs[k] = str(v)
            elif k == "n":
                kwargs[k] = int(v)
            else:
                kwargs[k] = float(v)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_config(cls, text: str) -> "ChainSpec":
        """Parse a flat key=value config (``#`` comments and blank lines ok)."""
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ChainSpecError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            data[key] = val
        return cls.from_dict(data)

    def with_(self, **kwargs) -> "ChainSpec":
        """Copy with some fields replaced (re-validated)."""
        return replace(self, **kwargs)


@dataclass(frozen=True)
class BandedOperator:
    """A complex matrix stored by diagonals.

    ``upper``/``lower`` map band offset (>= 1) to the band values; offset 1
    is the first off-diagonal (length ``dim - offset``).  All chain
    Hamiltonians are tridiagonal except the Nambu-doubled ones, which also
    carry pairing bands at offsets n-1 and n+1.
    """

    diag: np.ndarray
    upper: dict
    lower: dict

    @property
    def dim(self) -> int:
        return len(self.diag)

    @property
    def is_hermitian(self) -> bool:
        if np.max(np.abs(self.diag.imag), initial=0.0) > 1e-14:
            return False
        if set(self.upper) != set(self.lower):
            return False
        for off, band in self.upper.items():
            if np.max(np.abs(self.lower[off] - band.conj()), initial=0.0) > 1e-14:
                return False
        return True

    @property
    def is_tridiagonal(self) -> bool:
        return set(self.upper) <= {1} and set(self.lower) <= {1}

    def tridiagonal(self):
        """Return (diag, upper, lower) arrays; raises if not tridiagonal."""
        if not self.is_tridiagonal:
            raise ValueError("operator has bands beyond the first off-diagonal")
        n = self.dim
        up = self.upper.get(1, np.zeros(max(n - 1, 0), complex))
        lo = self.lower.get(1, np.zeros(max(n - 1, 0), complex))
        return self.diag, up, lo

    def to_dense(self) -> np.ndarray:
        H = np.diag(self.diag.astype(complex))
        for off, band in self.upper.items():
            H += np.diag(band.astype(complex), k=off)
        for off, band in self.lower.items():
            H += np.diag(band.astype(complex), k=-off)
        return H

    def norm_estimate(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        s = np.abs(self.diag).astype(float)
        for off, band in self.upper.items():
            s[: self.dim - off] += np.abs(band)
        for off, band in self.lower.items():
            s[off:] += np.abs(band)
        return float(s.max(initial=0.0))

    @classmethod
    def from_dense(cls, H: np.ndarray) -> "BandedOperator":
        """Extract the nonzero diagonals of a dense matrix."""
        H = np.asarray(H, complex)
        dim = H.shape[0]
        upper, lower = {}, {}
        for off in range(1, dim):
            ub = np.diagonal(H, offset=off)
            lb = np.diagonal(H, offset=-off)
            if np.any(ub != 0):
                upper[off] = ub.copy()
            if np.any(lb != 0):
                lower[off] = lb.copy()
        return cls(diag=np.diagonal(H).copy().astype(complex), upper=upper, lower=lower)


@dataclass(frozen=True)
class BdgBlock:
    """One 2x2 momentum block of the multiparam chain.

    ``block = [[a, delta_k], [delta_k, -a]]`` with ``a = xi + g*stag``, so
    its eigenvalues are exactly +-E_k, ``E_k = sqrt(a^2 + delta_k^2)``.
    """

    m: int
    k: float
    xi: float
    delta_k: float
    stag: float
    block: np.ndarray

    @property
    def energy(self) -> float:
        return float(np.hypot(self.block[0, 0].real, self.delta_k))


def _tridiag(n, diag, up, lo) -> BandedOperator:
    return BandedOperator(
        diag=np.asarray(diag, complex),
        upper={1: np.asarray(up, complex)} if n > 1 else {},
        lower={1: np.asarray(lo, complex)} if n > 1 else {},
    )


def _particle_block(spec: ChainSpec) -> np.ndarray:
    n, t = spec.n, spec.t
    stag = (-1.0) ** np.arange(1, n + 1)
    hop = t * np.exp(1j * spec.phi) if spec.kind == "multiparam" else t + 0j
    h = np.zeros((n, n), complex)
    np.fill_diagonal(h, -spec.mu)
    if spec.kind in ("pt", "multiparam"):
        h[np.diag_indices(n)] += 1j * spec.g * stag
    for j in range(n - 1):
        h[j, j + 1] = hop
        h[j + 1, j] = np.conj(hop)
    return h


def build_chain(spec: ChainSpec) -> BandedOperator:
    """Construct the single-particle matrix for ``spec``.

    Open boundary conditions.  ``hermitian``/``pt``/``multiparam`` chains
    with ``delta != 0`` return the Nambu-doubled 2n x 2n operator in basis
    order (c_1..c_n, c^+_1..c^+_n); otherwise the n x n block.
    """
    n, t = spec.n, spec.t

    if spec.kind == "nhse":
        up = np.full(max(n - 1, 0), t + spec.gamma)
        lo = np.full(max(n - 1, 0), t - spec.gamma)
        return _tridiag(n, np.zeros(n), up, lo)

    if spec.kind in ("pt", "multiparam") and n % 2 == 1 and spec.g != 0.0:
        warnings.warn(
            f"odd n={n}: the staggered potential is unbalanced under site "
            "reversal, so the chain is not PT-symmetric and carries an "
            "unpaired imaginary level",
            stacklevel=2,
        )

    h = _particle_block(spec)
    if spec.delta == 0.0:
        diag = np.diagonal(h).copy()
        up = np.diagonal(h, 1).copy()
        lo = np.diagonal(h, -1).copy()
        return _tridiag(n, diag, up, lo)

    # Nambu doubling H = [[h, D], [-conj(D), -h^T]], D antisymmetric pairing.
    D = np.zeros((n, n), complex)
    for j in range(n - 1):
        D[j, j + 1] = spec.delta
        D[j + 1, j] = -spec.delta
    H = np.zeros((2 * n, 2 * n), complex)
    H[:n, :n] = h
    H[:n, n:] = D
    H[n:, :n] = -D.conj()
    H[n:, n:] = -h.T
    return BandedOperator.from_dense(H)


def bdg_block(spec: ChainSpec, m: int) -> BdgBlock:
    """The m-th 2x2 momentum-space block (``multiparam`` kind, sine basis).

    ``xi_k = 2 t cos k + mu`` and ``delta_k = 2 delta sin k`` at
    ``k = m pi / (n+1)``; the staggered gain/loss enters as ``g (-1)^m``.
    """
    if spec.kind != "multiparam":
        raise ChainSpecError("bdg_block is defined for kind='multiparam'")
    if not 1 <= m <= spec.n:
        raise ChainSpecError(f"mode index m={m} outside 1..{spec.n}")
    k = m * np.pi / (spec.n + 1)
    xi = 2.0 * spec.t * np.cos(k) + spec.mu
    dk = 2.0 * spec.delta * np.sin(k)
    stag = (-1.0) ** m
    a = xi + spec.g * stag
    block = np.array([[a, dk], [dk, -a]], complex)
    return BdgBlock(m=m, k=k, xi=xi, delta_k=dk, stag=stag, block=block)


def pt_residual(H: BandedOperator | np.ndarray) -> float:
    """Frobenius norm of ``P conj(H) P - H`` with P the site-reversal.

    Zero (<= 1e-14 numerically) certifies PT symmetry of the single-particle
    block.  For the staggered chain this vanishes for even n; odd n leaves
    the gain/loss pattern unbalanced and the residual is of order
    ``2 g sqrt(n)``.
    """
    M = H.to_dense() if isinstance(H, BandedOperator) else np.asarray(H, complex)
    rev = M.conj()[::-1, ::-1]
    return float(np.linalg.norm(rev - M))


def transfer_matrix(E: complex, spec: ChainSpec, j_parity: str) -> np.ndarray:
    """Single-site transfer matrix ``[[(E - i g (-1)^j)/t, -1], [1, 0]]``.

    ``j_parity`` selects the staggered sign: ``"odd"`` means (-1)^j = -1.
    Determinant is 1 by construction.
    """
    if spec.t == 0:
        raise ChainSpecError("transfer matrix undefined for t = 0")
    if j_parity not in ("even", "odd"):
        raise ValueError("j_parity must be 'even' or 'odd'")
    sign = 1.0 if j_parity == "even" else -1.0
    a = (E - 1j * spec.g * sign) / spec.t
    return np.array([[a, -1.0], [1.0, 0.0]], complex)


def unit_cell_transfer(E: complex, spec: ChainSpec) -> np.ndarray:
    """Two-site product ``T_even @ T_odd``.

    Direct multiplication gives trace ``(E^2 + g^2)/t^2 - 2``; the printed
    ``-g^2`` variant does not follow from the per-site matrices.
    """
    return transfer_matrix(E, spec, "even") @ transfer_matrix(E, spec, "odd")

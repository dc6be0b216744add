"""
Perfect state transfer (PST): analysis and synthesis.

A chain transfers an excitation perfectly from site 0 to site N at time
``tau`` iff it is mirror symmetric and consecutive eigenvalue gaps are odd
multiples of ``pi / tau``. :func:`synthesize_from_spectrum` solves the inverse
problem, returning the unique mirror-symmetric Jacobi matrix with a given
spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .chain import Chain, SpectralData, diagonalize
from .errors import ConditioningFailure, DegenerateSpectrum, NegativeJSquared

__all__ = [
    "MonicPoly",
    "PstVerdict",
    "transfer_amplitude",
    "transfer_fidelity",
    "mirror_symmetry_residual",
    "spectral_gap_check",
    "pst_spectrum",
    "mirror_weights",
    "synthesize_from_spectrum",
    "euclidean_recurrence",
    "pst_verdict",
]


@dataclass(frozen=True, eq=False)
class MonicPoly:
    """Monic real polynomial; ``coef`` in ascending powers, ``coef[-1] == 1``."""

    coef: np.ndarray

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coef, dtype=float), "b")
        if c.size == 0 or c[-1] != 1.0:
            raise ValueError("leading coefficient must be exactly 1")
        object.__setattr__(self, "coef", c)

    @classmethod
    def normalized(cls, coef) -> "MonicPoly":
        """Divide by the leading coefficient, forcing it to exactly 1."""
        c = np.array(coef, dtype=float)
        c = c / c[-1]
        c[-1] = 1.0
        return cls(c)

    @classmethod
    def from_roots(cls, roots) -> "MonicPoly":
        return cls.normalized(npoly.polyfromroots(roots))

    @property
    def degree(self) -> int:
        return self.coef.size - 1

    def __call__(self, x):
        return npoly.polyval(x, self.coef)


@dataclass(frozen=True)
class PstVerdict:
    mirror_residual: float
    gap_ok: bool
    M: np.ndarray
    tau: float
    fidelity: float
    phase: float
    verdict: bool


def transfer_amplitude(sd: SpectralData, t):
    """``<N| exp(-i t Lambda) |0> = sum_k phi_0(w_k) phi_N(w_k) exp(-i w_k t)``.

    ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    c = sd.phi[0] * sd.phi[-1]
    phases = np.exp(-1j * np.multiply.outer(t, sd.omegas))
    return phases @ c


def transfer_fidelity(sd: SpectralData, t):
    """Probability ``|<N| exp(-i t Lambda) |0>|^2`` of finding the excitation at site N."""
    amp = transfer_amplitude(sd, t)
    out = amp.real ** 2 + amp.imag ** 2
    return float(out) if out.ndim == 0 else out


def mirror_symmetry_residual(chain: Chain) -> float:
    """max of ``|B_{N-n} - B_n|`` and ``|J_{N-1-n} - J_n|``."""
    r = np.max(np.abs(chain.B - chain.B[::-1]))
    if chain.J.size:
        r = max(r, np.max(np.abs(chain.J - chain.J[::-1])))
    return float(r)


def spectral_gap_check(omegas, tau: float, tol: float = 1e-8):
    """Check that every gap equals ``(pi / tau) M_k`` with ``M_k`` odd and positive.

    Returns
    -------
    ok : bool
    M : ndarray of int
        Nearest integers to ``gap * tau / pi``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    ratios = np.diff(np.asarray(omegas, dtype=float)) * tau / np.pi
    M = np.rint(ratios).astype(int)
    ok = bool(np.all(np.abs(ratios - M) <= tol) and np.all(M > 0) and np.all(M % 2 == 1))
    return ok, M


def pst_spectrum(M, tau: float = np.pi, omega0: float = 0.0) -> np.ndarray:
    """Spectrum with gaps ``(pi / tau) M_k`` starting at ``omega0``."""
    M = np.asarray(M)
    if np.any(M <= 0) or np.any(M % 2 != 1):
        raise ValueError("gap multipliers must be odd positive integers")
    return omega0 + np.concatenate([[0.0], np.cumsum(M)]) * np.pi / tau


def _prepare_spectrum(omegas):
    w = np.sort(np.asarray(omegas, dtype=float))
    if w.size < 2:
        raise ValueError("need at least two eigenvalues")
    if np.any(np.diff(w) <= 0):
        raise DegenerateSpectrum("eigenvalues must be distinct")
    return w


def mirror_weights(omegas) -> np.ndarray:
    """Spectral weights ``phi_0(w_k)^2`` of the mirror-symmetric chain with this spectrum.

    Mirror symmetry fixes ``chi_N(w_k) = (-1)^(N+k)``, which makes the
    weights proportional to ``1 / |prod_{j != k} (w_k - w_j)|``, i.e. to the
    moduli of the barycentric interpolation weights.
    """
    w = _prepare_spectrum(omegas)
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, 1.0)
    logw = -np.log(d).sum(axis=1)
    out = np.exp(logw - logw.max())
    return out / out.sum()


def _lanczos(nodes, weights):
    """Jacobi matrix of the discrete measure sum_k weights_k delta(x - nodes_k)."""
    n = nodes.size
    Q = np.zeros((n, n))
    Q[:, 0] = np.sqrt(weights)
    a = np.zeros(n)
    b = np.zeros(n - 1)
    for j in range(n):
        v = nodes * Q[:, j]
        a[j] = Q[:, j] @ v
        if j == n - 1:
            break
        v -= a[j] * Q[:, j]
        if j > 0:
            v -= b[j - 1] * Q[:, j - 1]
        # full reorthogonalization, twice
        for _ in range(2):
            v -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ v)
        b2 = v @ v
        if not b2 > 0:
            raise NegativeJSquared(j, b2)
        b[j] = np.sqrt(b2)
        Q[:, j + 1] = v / b[j]
    return b, a


def euclidean_recurrence(omegas):
    """Mirror-symmetric recurrence coefficients by repeated Euclidean division.

    1. ``P_{N+1}(x) = prod_k (x - w_k)``.
    2. ``P_N`` is the monic multiple of the degree-N interpolant through
       ``(w_k, (-1)^(N+k))``.
    3. Dividing ``P_{l+1}`` by ``P_l`` gives quotient ``x - B_l`` and remainder
       ``-J_{l-1}^2 P_{l-1}``; iterate l = N, ..., 1.

    Works in the monomial basis on the spectrum rescaled to [-1, 1]. The
    division chain amplifies rounding roughly like 2^N, so in double
    precision it is trustworthy only up to N of about 15; use
    :func:`synthesize_from_spectrum` beyond that.

    Returns
    -------
    J, B : ndarray
        Couplings and fields (in the original energy units).
    polys : list of MonicPoly
        ``P_0, ..., P_{N+1}`` in the rescaled variable.
    """
    w = _prepare_spectrum(omegas)
    N = w.size - 1
    center = 0.5 * (w[0] + w[-1])
    half = 0.5 * (w[-1] - w[0])
    u = (w - center) / half

    top = MonicPoly.from_roots(u)
    bary = 1.0 / np.array([np.prod(np.delete(u[k] - u, k)) for k in range(N + 1)])
    y = (-1.0) ** (N + np.arange(N + 1))
    coef = np.zeros(N + 1)
    for k in range(N + 1):
        # P_{N+1}(x) / (x - u_k) by synthetic division
        q, _ = npoly.polydiv(top.coef, [-u[k], 1.0])
        coef += y[k] * bary[k] * q[: N + 1]
    polys = [None] * (N + 2)
    polys[N + 1] = top
    polys[N] = MonicPoly.normalized(coef)

    Bu = np.zeros(N + 1)
    J2 = np.zeros(N)
    for ell in range(N, 0, -1):
        hi, lo = polys[ell + 1].coef, polys[ell].coef
        # x^ell coefficient of P_{ell+1} - x P_ell + B P_ell must vanish
        Bu[ell] = lo[ell - 1] - hi[ell]
        rem = hi - npoly.polymul([-Bu[ell], 1.0], lo)[: ell + 2]
        rem = rem[:ell]
        J2[ell - 1] = -rem[-1]
        if not J2[ell - 1] > 0:
            raise NegativeJSquared(ell - 1, J2[ell - 1] * half ** 2)
        polys[ell - 1] = MonicPoly.normalized(rem)
    Bu[0] = -polys[1].coef[0]
    return half * np.sqrt(J2), center + half * Bu, polys


def synthesize_from_spectrum(omegas, *, method: str = "lanczos", rtol: float = 1e-8,
                             dual=None) -> Chain:
    """Mirror-symmetric chain whose one-excitation spectrum is ``omegas``.

    Parameters
    ----------
    omegas : array_like
        N+1 distinct eigenvalues (sorted internally).
    method : {"lanczos", "euclid"}
        ``"euclid"`` runs the literal Euclidean division chain
        (:func:`euclidean_recurrence`), which is exact in exact arithmetic but
        unstable beyond N of about 15. ``"lanczos"`` builds the same Jacobi
        matrix from the spectral weights fixed by mirror symmetry
        (:func:`mirror_weights`) with a fully reorthogonalized Lanczos
        sweep; it is stable to N of a few tens for generic spectra.
    rtol : float
        Round-trip tolerance: the synthesized chain must reproduce the
        spectrum within ``rtol * max|omega|``.
    dual : array_like, optional
        Dual grid to attach to the result.

    Raises
    ------
    DegenerateSpectrum, NegativeJSquared, ConditioningFailure
    """
    w = _prepare_spectrum(omegas)
    if method == "euclid":
        J, B, _ = euclidean_recurrence(w)
    elif method == "lanczos":
        center = 0.5 * (w[0] + w[-1])
        half = 0.5 * (w[-1] - w[0])
        Ju, Bu = _lanczos((w - center) / half, mirror_weights(w))
        J, B = half * Ju, center + half * Bu
    else:
        raise ValueError(f"unknown method {method!r}")
    # exact mirror symmetry; the two halves differ only by rounding
    J = 0.5 * (J + J[::-1])
    B = 0.5 * (B + B[::-1])
    chain = Chain(J, B, dual)

    got = diagonalize(chain).omegas
    scale = max(np.max(np.abs(w)), w[-1] - w[0])
    err = np.max(np.abs(got - w))
    if err > rtol * scale:
        raise ConditioningFailure(
            f"round-trip spectrum error {err:.3e} exceeds {rtol:g} * {scale:.3e}"
        )
    return chain


def pst_verdict(chain: Chain, tau: float, *, mirror_tol: Optional[float] = None,
                gap_tol: float = 1e-8, fidelity_tol: float = 1e-9,
                sd: Optional[SpectralData] = None) -> PstVerdict:
    """Combine mirror symmetry, the gap condition and the fidelity at ``tau``.

    Default mirror tolerance is ``1e-10 * max(|B|, |J|)``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if sd is None:
        sd = diagonalize(chain)
    if mirror_tol is None:
        mirror_tol = 1e-10 * max(np.max(np.abs(chain.B)), np.max(chain.J, initial=0.0), 1e-300)
    mres = mirror_symmetry_residual(chain)
    gap_ok, M = spectral_gap_check(sd.omegas, tau, gap_tol)
    amp = complex(transfer_amplitude(sd, tau))
    fid = abs(amp) ** 2
    verdict = bool(mres <= mirror_tol and gap_ok and fid >= 1.0 - fidelity_tol)
    return PstVerdict(mres, gap_ok, M, float(tau), float(fid), float(np.angle(amp)), verdict)

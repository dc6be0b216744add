"""
Ground-state entanglement of free-fermion chains.

The ground state fills modes 0..K. Everything about a region of sites
follows from the restricted two-point matrix ``C_mn = sum_{k<=K} phi_m phi_n``:
the entanglement entropy, the entanglement Hamiltonian ``h = ln((1-C)/C)``,
and, for chains with a dual grid, the tridiagonal Heun operator ``T`` that
commutes with ``C`` and gives a well-conditioned route to its spectrum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .chain import Chain, SpectralData
from .errors import (
    DegenerateT,
    IndexOutOfRange,
    MissingDualGrid,
    NoConvergence,
    NotCommuting,
)

__all__ = [
    "CorrelationMatrix",
    "HeunOperator",
    "EntanglementHamiltonian",
    "AffineFit",
    "fermi_level",
    "interval",
    "correlation_matrix",
    "binary_entropy",
    "entropy_from_spectrum",
    "entanglement_entropy",
    "entanglement_hamiltonian",
    "heun_operator",
    "commutator_residual",
    "stable_correlation_spectrum",
    "fit_affine_spectrum",
    "fit_affine_approximation",
]

ENTROPY_EPS = 1e-15
HAMILTONIAN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Two-point matrix of the ground state restricted to ``region``."""

    region: np.ndarray
    C: np.ndarray
    K: int

    @property
    def size(self) -> int:
        return self.region.size


@dataclass(frozen=True, eq=False)
class HeunOperator:
    """Top-left (ell+1)-block of ``{Lambda - omega_mid, X - lambda_mid}``."""

    T: np.ndarray
    omega_mid: float
    lambda_mid: float
    K: int
    ell: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.T).copy()

    @property
    def offdiagonal(self) -> np.ndarray:
        return np.diag(self.T, 1).copy()


class EntanglementHamiltonian(NamedTuple):
    h: np.ndarray
    epsilon: np.ndarray
    n_clamped: int


@dataclass
class AffineFit:
    alpha0: float
    alpha1: float
    residual_number: float
    residual_entropy: float
    pearson: float
    rms: float
    n_resolved: int
    t: np.ndarray = field(repr=False)
    epsilon: np.ndarray = field(repr=False)

    def as_dict(self):
        return {
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "residual_number": self.residual_number,
            "residual_entropy": self.residual_entropy,
            "pearson": self.pearson,
            "rms": self.rms,
            "n_resolved": self.n_resolved,
        }


def fermi_level(sd: SpectralData) -> int:
    """Largest K with ``omega_K < 0``; the ground state fills modes 0..K.

    A mode within ``1e-12 max|omega|`` of zero counts as zero energy and is
    left empty, so rounding cannot decide the filling.
    """
    tol = 1e-12 * np.max(np.abs(sd.omegas))
    neg = np.flatnonzero(sd.omegas < -tol)
    if neg.size == 0:
        raise ValueError("no negative-energy mode; choose K explicitly or shift the fields")
    return int(neg[-1])


def interval(ell: int, start: int = 0) -> np.ndarray:
    """Sites ``start, ..., start + ell`` (ell + 1 sites)."""
    return np.arange(start, start + ell + 1)


def correlation_matrix(sd: SpectralData, K: int, region: Optional[Sequence[int]] = None
                       ) -> CorrelationMatrix:
    """``C_mn = sum_{k=0}^{K} phi_m(omega_k) phi_n(omega_k)`` for m, n in ``region``.

    ``region`` defaults to the whole chain.
    """
    N = sd.N
    if not 0 <= K <= N:
        raise IndexOutOfRange(f"filling index K={K} outside 0..{N}")
    region = np.arange(N + 1) if region is None else np.asarray(region, dtype=int)
    if region.size and (region.min() < 0 or region.max() > N):
        raise IndexOutOfRange(f"region sites must lie in 0..{N}")
    rows = sd.phi[region, : K + 1]
    C = rows @ rows.T
    C = 0.5 * (C + C.T)
    return CorrelationMatrix(region, C, int(K))


def binary_entropy(g):
    """``-g ln g - (1-g) ln(1-g)`` in nats (0 at the endpoints)."""
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(g * np.log(g) + (1 - g) * np.log1p(-g))
    return np.where((g <= 0) | (g >= 1), 0.0, out)


def entropy_from_spectrum(gamma, eps: float = ENTROPY_EPS) -> float:
    g = np.clip(np.asarray(gamma, dtype=float), eps, 1 - eps)
    return float(np.sum(binary_entropy(g)))


def entanglement_entropy(C: CorrelationMatrix) -> float:
    """Von Neumann entropy (nats) of the region, from the eigenvalues of C."""
    return entropy_from_spectrum(np.linalg.eigvalsh(C.C))


def entanglement_hamiltonian(C: CorrelationMatrix, eps: float = HAMILTONIAN_EPS
                             ) -> EntanglementHamiltonian:
    """Single-particle entanglement Hamiltonian ``h = ln((1 - C) / C)``.

    Eigenvalues of C are clipped to ``[eps, 1 - eps]`` first; ``n_clamped``
    counts how many were clipped, since their entanglement energies are then
    pinned at ``+-ln(1/eps - 1)`` rather than resolved.
    """
    gamma, V = np.linalg.eigh(C.C)
    n_clamped = int(np.sum((gamma < eps) | (gamma > 1 - eps)))
    g = np.clip(gamma, eps, 1 - eps)
    epsilon = np.log1p(-g) - np.log(g)
    h = (V * epsilon) @ V.T
    return EntanglementHamiltonian(0.5 * (h + h.T), epsilon, n_clamped)


def heun_operator(chain: Chain, sd: SpectralData, K: int, ell: int) -> HeunOperator:
    """Heun operator commuting with C on the first ell+1 sites.

    ``T`` is the top-left ``(ell+1) x (ell+1)`` block of
    ``{Lambda - omega_mid I, X - lambda_mid I}`` with
    ``omega_mid = (omega_K + omega_{K+1}) / 2`` and
    ``lambda_mid = (lambda_ell + lambda_{ell+1}) / 2``. Because X is
    diagonal, the block of the anticommutator is the anticommutator of the
    blocks, so only the leading blocks are formed. Entries come out as
    ``T_nn = 2 (B_n - omega_mid)(lambda_n - lambda_mid)`` and
    ``T_{n,n+1} = J_n (lambda_n + lambda_{n+1} - lambda_ell - lambda_{ell+1})``.
    """
    if chain.dual is None:
        raise MissingDualGrid("the Heun operator needs a chain with a dual grid")
    N = chain.N
    if not 0 <= K <= N - 1:
        raise IndexOutOfRange(f"K={K} must lie in 0..{N - 1}")
    if not 0 <= ell <= N - 1:
        raise IndexOutOfRange(f"ell={ell} must lie in 0..{N - 1}")
    omega_mid = 0.5 * (sd.omegas[K] + sd.omegas[K + 1])
    lambda_mid = 0.5 * (chain.dual[ell] + chain.dual[ell + 1])
    m = ell + 1
    L = np.diag(chain.B[:m] - omega_mid) + np.diag(chain.J[: m - 1], 1) + np.diag(chain.J[: m - 1], -1)
    X = np.diag(chain.dual[:m] - lambda_mid)
    T = L @ X + X @ L
    return HeunOperator(T, float(omega_mid), float(lambda_mid), int(K), int(ell))


def commutator_residual(T: HeunOperator, C: CorrelationMatrix) -> float:
    """``max|[T, C]| / max|T|``.

    C is a contraction (eigenvalues in [0, 1]), so T sets the only scale.
    Dividing by ``max|C|`` as well would blow rounding noise up wherever the
    region is nearly empty or nearly full.
    """
    t, c = T.T, C.C
    if t.shape != c.shape:
        raise ValueError(f"T is {t.shape}, C is {c.shape}")
    scale = np.max(np.abs(t))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(t @ c - c @ t)) / scale)


def stable_correlation_spectrum(C: CorrelationMatrix, T: HeunOperator, *,
                                tol: float = 1e-8, gap_tol: float = 1e-12):
    """Eigenvalues of C read off in the eigenbasis of the commuting Heun operator.

    C has eigenvalues piled up exponentially close to 0 and 1, so its own
    eigenvectors are poorly determined; T is tridiagonal with a well
    separated spectrum. Diagonalize T and evaluate ``gamma_n = v_n^T C v_n``.

    Returns
    -------
    gamma : ndarray
        Ordered like the ascending eigenvalues of T.
    vectors : ndarray
        Columns are the shared eigenvectors.
    t : ndarray
        Eigenvalues of T.

    Raises
    ------
    NotCommuting
        If ``commutator_residual(T, C) > tol``.

    Warns
    -----
    DegenerateT
        If two eigenvalues of T are closer than ``gap_tol`` (relative); C is
        then diagonalized directly.
    """
    res = commutator_residual(T, C)
    if res > tol:
        raise NotCommuting(f"[T, C] residual {res:.3e} exceeds {tol:g}")
    t, V = eigh_tridiagonal(np.diag(T.T), np.diag(T.T, 1))
    scale = max(np.max(np.abs(t)), 1.0)
    if t.size > 1 and np.min(np.diff(t)) < gap_tol * scale:
        warnings.warn("Heun operator has a near-degenerate spectrum; "
                      "diagonalizing C directly", DegenerateT, stacklevel=2)
        gamma, V = np.linalg.eigh(C.C)
        return gamma, V, np.diag(V.T @ T.T @ V)
    gamma = np.einsum("in,ij,jn->n", V, C.C, V)
    return gamma, V, t


# --------------------------------------------------------------------------
# affine approximation h ~ alpha0 + alpha1 T
# --------------------------------------------------------------------------

def _fermi(x):
    # occupation of a mode with entanglement energy x: 1 / (1 + e^x)
    return 0.5 * (1.0 - np.tanh(0.5 * x))


def _conditions(alpha, t, target_n, target_s):
    x = alpha[0] + alpha[1] * t
    f = _fermi(x)
    F = np.array([f.sum() - target_n, binary_entropy(f).sum() - target_s])
    # df/dx = -f(1-f); d H2(f)/dx = ln((1-f)/f) df/dx = -x f(1-f)
    g = -f * (1 - f)
    Jac = np.array([[g.sum(), (g * t).sum()], [(x * g).sum(), (x * g * t).sum()]])
    return F, Jac


def _newton(alpha, t, target_n, target_s, tol, max_iter):
    F, Jac = _conditions(alpha, t, target_n, target_s)
    norm = np.max(np.abs(F))
    for _ in range(max_iter):
        if norm < tol:
            break
        try:
            step = np.linalg.solve(Jac, -F)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-10:
            trial = alpha + lam * step
            Ft, Jt = _conditions(trial, t, target_n, target_s)
            nt = np.max(np.abs(Ft))
            if nt < norm:
                alpha, F, Jac, norm = trial, Ft, Jt, nt
                break
            lam *= 0.5
        else:
            break
    return alpha, F


def fit_affine_spectrum(t, gamma, *, tol: float = 1e-12, max_iter: int = 200,
                        resolve_eps: float = 1e-10) -> AffineFit:
    """Fit ``epsilon_n ~ alpha0 + alpha1 t_n`` by matching particle number and entropy.

    The Gaussian state with single-particle Hamiltonian ``alpha0 + alpha1 T``
    has occupations ``f(alpha0 + alpha1 t_n)``, ``f(x) = 1 / (1 + e^x)``. The
    two conditions

        sum_n f(x_n) = sum_n gamma_n,        sum_n H2(f(x_n)) = S(gamma)

    are solved by damped Newton with the analytic Jacobian, started from a
    least-squares line through the middle half of the entanglement spectrum
    and, failing that, from eight perturbed starts.

    Diagnostics (Pearson correlation and RMS deviation between
    ``epsilon_n`` and the fitted line) use only modes with
    ``resolve_eps <= gamma_n <= 1 - resolve_eps``; the others sit below
    double-precision resolution and their ``epsilon_n`` carry no information.
    """
    t = np.asarray(t, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    order = np.argsort(t)
    t, gamma = t[order], gamma[order]
    g = np.clip(gamma, ENTROPY_EPS, 1 - ENTROPY_EPS)
    eps_all = np.log1p(-g) - np.log(g)
    target_n = float(np.sum(np.clip(gamma, 0.0, 1.0)))
    target_s = entropy_from_spectrum(gamma)

    n = t.size
    lo, hi = n // 4, n - n // 4
    if hi - lo < 2:
        lo, hi = 0, n
    if hi - lo >= 2 and np.ptp(t[lo:hi]) > 0:
        a1, a0 = np.polyfit(t[lo:hi], eps_all[lo:hi], 1)
    else:
        a0, a1 = 0.0, 1.0
    starts = [np.array([a0, a1])]
    scale = max(abs(a1), 1e-3 / max(np.ptp(t), 1e-300))
    for s0, s1 in [(0, 1), (0, -1), (1, 1), (-1, 1), (0, 2), (0, 0.5), (1, -1), (-1, -1)]:
        starts.append(np.array([a0 + s0 * max(1.0, abs(a0)), s1 * scale]))

    best = None
    for start in starts:
        alpha, F = _newton(start, t, target_n, target_s, tol, max_iter)
        if abs(alpha[1]) < 1e-14:
            continue
        if best is None or np.max(np.abs(F)) < np.max(np.abs(best[1])):
            best = (alpha, F)
        if np.max(np.abs(F)) < tol:
            break
    if best is None or not np.max(np.abs(best[1])) < max(tol, 1e-9):
        raise NoConvergence("affine fit did not converge",
                            best=None if best is None else best[0],
                            residuals=None if best is None else best[1])
    alpha, F = best
    mask = (gamma >= resolve_eps) & (gamma <= 1 - resolve_eps)
    fitted = alpha[0] + alpha[1] * t
    if mask.sum() >= 2:
        pearson = float(np.corrcoef(eps_all[mask], t[mask])[0, 1])
        rms = float(np.sqrt(np.mean((eps_all[mask] - fitted[mask]) ** 2)))
    else:
        pearson, rms = float("nan"), float("nan")
    return AffineFit(float(alpha[0]), float(alpha[1]), float(abs(F[0])), float(abs(F[1])),
                     pearson, rms, int(mask.sum()), t, eps_all)


def fit_affine_approximation(C: CorrelationMatrix, T: HeunOperator, **kwargs) -> AffineFit:
    """Affine approximation ``h ~ alpha0 + alpha1 T`` of the entanglement Hamiltonian.

    Uses the commuting eigenbasis of T (see :func:`stable_correlation_spectrum`)
    and then :func:`fit_affine_spectrum`.
    """
    gamma, _, t = stable_correlation_spectrum(C, T)
    return fit_affine_spectrum(t, gamma, **kwargs)

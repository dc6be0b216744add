"""
Inhomogeneous XX chains in the one-excitation (free-fermion) picture.

A chain with N+1 sites is fixed by its couplings ``J`` (length N) and
magnetic fields ``B`` (length N+1). Its one-excitation Hamiltonian is the
Jacobi matrix

    Lambda = tridiag(J, B, J)

whose eigenvectors ``phi[:, k] = (phi_0(omega_k), ..., phi_N(omega_k))``
are orthogonal-polynomial wavefunctions. Eigenvalues are always returned in
ascending order and every eigenvector is gauged so that ``phi_0(omega_k) > 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

import mpmath
import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import gammaln

from .errors import (
    ConditioningFailure,
    ConvergenceFailure,
    IndexOutOfRange,
    LengthMismatch,
    NonMonotoneDual,
    NonPositiveCoupling,
)

__all__ = [
    "Chain",
    "SpectralData",
    "krawtchouk_chain",
    "homogeneous_chain",
    "build_chain",
    "load_chain",
    "chain_to_spec",
    "diagonalize",
    "closed_form_reference",
    "krawtchouk_polynomials",
    "krawtchouk_wavefunctions",
    "homogeneous_wavefunctions",
    "orthonormality_residual",
    "eigen_residual",
    "wavefunction_rows",
    "krawtchouk_rows",
    "recurrence_limit",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Chain:
    """Couplings and fields of an (N+1)-site XX chain.

    Parameters
    ----------
    J : array_like, shape (N,)
        Nearest-neighbour couplings, all strictly positive.
    B : array_like, shape (N+1,)
        On-site magnetic fields.
    dual : array_like, shape (N+1,), optional
        Eigenvalues of the position operator ``X`` (the dual grid). Needed
        only for the Heun operator. Must be strictly increasing.
    """

    J: np.ndarray
    B: np.ndarray
    dual: Optional[np.ndarray] = None

    def __post_init__(self):
        J = _frozen(np.atleast_1d(self.J) if np.size(self.J) else [])
        B = _frozen(np.atleast_1d(self.B))
        if J.ndim != 1 or B.ndim != 1:
            raise LengthMismatch("J and B must be one-dimensional")
        if B.size < 1:
            raise LengthMismatch("a chain needs at least one site")
        if J.size != B.size - 1:
            raise LengthMismatch(
                f"len(J) = {J.size} but len(B) = {B.size}; expected len(J) = len(B) - 1"
            )
        if not np.all(np.isfinite(J)) or not np.all(np.isfinite(B)):
            raise ValueError("couplings and fields must be finite")
        if np.any(J <= 0):
            bad = int(np.flatnonzero(J <= 0)[0])
            raise NonPositiveCoupling(f"J[{bad}] = {J[bad]!r} is not > 0")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "B", B)
        if self.dual is not None:
            dual = _frozen(self.dual)
            if dual.shape != B.shape:
                raise LengthMismatch(
                    f"dual grid has {dual.size} entries, chain has {B.size} sites"
                )
            if np.any(np.diff(dual) <= 0):
                raise NonMonotoneDual("dual grid must be strictly increasing")
            object.__setattr__(self, "dual", dual)

    @property
    def N(self) -> int:
        """Number of sites minus one."""
        return self.B.size - 1

    @property
    def n_sites(self) -> int:
        return self.B.size

    def matrix(self) -> np.ndarray:
        """Dense one-excitation Hamiltonian ``Lambda``."""
        return np.diag(self.B) + np.diag(self.J, 1) + np.diag(self.J, -1)

    def position_matrix(self) -> np.ndarray:
        if self.dual is None:
            return None
        return np.diag(self.dual)

    def shifted(self, c: float) -> "Chain":
        """Same chain with every field moved by ``c``.

        The spectrum moves rigidly by ``c`` and the wavefunctions are unchanged.
        """
        return Chain(self.J, self.B + c, self.dual)

    def __repr__(self):
        dual = "" if self.dual is None else ", dual=..."
        return f"Chain(N={self.N}{dual})"


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues (ascending) and the wavefunction matrix ``phi[n, k]``."""

    omegas: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omegas", _frozen(self.omegas))
        object.__setattr__(self, "phi", _frozen(self.phi))

    @property
    def N(self) -> int:
        return self.omegas.size - 1

    @property
    def weights(self) -> np.ndarray:
        """Orthogonality weights ``phi_0(omega_k)**2``."""
        return self.phi[0] ** 2


def krawtchouk_chain(N: int, p: float) -> Chain:
    """Krawtchouk chain with couplings ``sqrt(p(1-p)(n+1)(N-n))``.

    Its spectrum is ``omega_k = k`` for every ``p`` and its dual grid is
    ``lambda_l = l``.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    N = int(N)
    n = np.arange(N)
    ell = np.arange(N + 1)
    J = np.sqrt(p * (1.0 - p)) * np.sqrt((n + 1.0) * (N - n))
    B = p * (N - ell) + (1.0 - p) * ell
    return Chain(J, B, ell.astype(float))


def homogeneous_chain(N: int, J: float = 1.0, B: float = 0.0) -> Chain:
    if int(N) != N or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N!r}")
    N = int(N)
    return Chain(np.full(N, float(J)), np.full(N + 1, float(B)), np.arange(N + 1.0))


def build_chain(spec: Mapping) -> Chain:
    """Build a chain from a JSON-style mapping.

    Accepted shapes::

        {"kind": "krawtchouk", "N": 32, "p": 0.5}
        {"kind": "homogeneous", "N": 32, "J": 1.0, "B": 0.0}
        {"kind": "custom", "J": [...], "B": [...], "dual": [...]}   # dual optional
    """
    kind = spec.get("kind")
    if kind == "krawtchouk":
        return krawtchouk_chain(spec["N"], spec["p"])
    if kind == "homogeneous":
        return homogeneous_chain(spec["N"], spec.get("J", 1.0), spec.get("B", 0.0))
    if kind == "custom":
        return Chain(spec["J"], spec["B"], spec.get("dual"))
    raise ValueError(f"unknown chain kind {kind!r}")


def load_chain(path) -> Chain:
    return build_chain(json.loads(Path(path).read_text()))


def chain_to_spec(chain: Chain) -> dict:
    """Custom-kind JSON mapping for ``chain`` (inverse of :func:`build_chain`)."""
    spec = {"kind": "custom", "J": chain.J.tolist(), "B": chain.B.tolist()}
    if chain.dual is not None:
        spec["dual"] = chain.dual.tolist()
    return spec


# --------------------------------------------------------------------------
# diagonalization
# --------------------------------------------------------------------------

def _monic_at_rows(B, J, omegas, rows):
    """Sign and ``ln|.|`` of the monic polynomial P_{rows[k]} at omegas[k].

    Uses the ratio form r_n = P_n / P_{n-1} of the monic recurrence
    P_{n+1} = (x - B_n) P_n - J_{n-1}^2 P_{n-1}, which cannot overflow.
    """
    sign = np.ones_like(omegas)
    logabs = np.zeros_like(omegas)
    out_sign = np.ones_like(omegas)
    out_log = np.zeros_like(omegas)
    r = None
    tiny = np.finfo(float).tiny
    for n in range(1, int(rows.max()) + 1):
        if r is None:
            r = omegas - B[0]
        else:
            with np.errstate(over="ignore"):
                r = (omegas - B[n - 1]) - J[n - 2] ** 2 / r
        r = np.where(r == 0.0, tiny, r)
        sign = sign * np.sign(r)
        logabs = logabs + np.log(np.abs(r))
        hit = rows == n
        out_sign[hit] = sign[hit]
        out_log[hit] = logabs[hit]
    return out_sign, out_log


# below this ratio to the largest entry, phi_0 is rebuilt from the recurrence
EDGE_REBUILD_RATIO = 1e-8


def diagonalize(chain: Chain) -> SpectralData:
    """Full eigendecomposition of the chain's Jacobi matrix.

    Eigenvalues are ascending. Each eigenvector is gauged so that
    ``phi_0(omega_k) > 0``; the gauge is fixed through the sign of the monic
    polynomial at the vector's largest component m, so it stays reliable
    when ``phi_0(omega_k)`` itself is far below machine precision.

    The MRRR driver (LAPACK ``stemr``) resolves most tiny edge components to
    high relative accuracy, but not all (it can return an exact zero for a
    component near 1e-20). Where ``|phi_0| < 1e-8 |phi_m|`` the edge value is
    rebuilt as ``phi_m prod_{j<m} J_j / P_m(omega_k)``: the recurrence from
    site 0 to m runs from the forbidden into the allowed zone, so it is
    stable and keeps full relative accuracy.

    Raises
    ------
    ConvergenceFailure
        If LAPACK fails to converge.
    """
    B, J = chain.B, chain.J
    N = chain.N
    if N == 0:
        return SpectralData(B.copy(), np.ones((1, 1)))
    try:
        omegas, phi = eigh_tridiagonal(B, J, lapack_driver="stemr")
    except LinAlgError as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc

    cols = np.arange(N + 1)
    rows = np.argmax(np.abs(phi), axis=0)
    want, logP = _monic_at_rows(B, J, omegas, rows)
    have = np.sign(phi[rows, cols])
    phi = phi * (want * have)[None, :]

    peak = np.abs(phi[rows, cols])
    small = (np.abs(phi[0]) < EDGE_REBUILD_RATIO * peak) & (rows > 0)
    if np.any(small):
        logJ = np.concatenate([[0.0], np.cumsum(np.log(J))])
        with np.errstate(under="ignore"):
            edge = peak * np.exp(logJ[rows] - logP)
        phi[0, small] = edge[small]
    return SpectralData(omegas, phi)


def orthonormality_residual(sd: SpectralData) -> float:
    """max-norm of ``phi^T phi - I``."""
    phi = sd.phi
    return float(np.max(np.abs(phi.T @ phi - np.eye(phi.shape[1]))))


def eigen_residual(chain: Chain, sd: SpectralData) -> float:
    """max over k of ``|Lambda phi_k - omega_k phi_k|``."""
    return float(np.max(np.abs(chain.matrix() @ sd.phi - sd.phi * sd.omegas[None, :])))


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------
def krawtchouk_polynomials(n_max: int, x, p: float, N: int) -> np.ndarray:
    """Krawtchouk polynomials ``K_n(x; p, N)`` for n = 0..n_max, in float64.

    Forward three-term recurrence
    ``-x K_n = p(N-n) K_{n+1} - [p(N-n) + n(1-p)] K_n + n(1-p) K_{n-1}``.
    Returns an array of shape ``(n_max + 1,) + shape(x)``. In double
    precision the recurrence loses relative accuracy where ``K_n`` is small
    next to its growth (p far from 1/2, N of a few tens); the wavefunction
    helpers below run the same recurrence in extended precision instead.
    """
    x = np.asarray(x, dtype=float)
    K = np.empty((n_max + 1,) + x.shape)
    K[0] = 1.0
    if n_max >= 1:
        K[1] = 1.0 - x / (p * N)
    for n in range(1, n_max):
        K[n + 1] = ((p * (N - n) + n * (1 - p) - x) * K[n] - n * (1 - p) * K[n - 1]) / (
            p * (N - n)
        )
    return K


def _krawtchouk_phi_mp(N, p, n_max, ks):
    """phi_n(k) for n = 0..n_max and every k in ks, recurrence run in mpmath."""
    # digits lost by the forward recurrence grow roughly linearly in N
    out = np.empty((n_max + 1, len(ks)))
    with mpmath.workdps(30 + int(N)):
        P = mpmath.mpf(p)
        Q = 1 - P
        for col, k in enumerate(ks):
            x = mpmath.mpf(int(k))
            vals = [mpmath.mpf(1), 1 - x / (P * N)]
            for n in range(1, n_max):
                Kn, Km = vals[-1], vals[-2]
                vals.append(((P * (N - n) + n * Q - x) * Kn - n * Q * Km) / (P * (N - n)))
            for n in range(n_max + 1):
                amp = mpmath.sqrt(mpmath.binomial(N, n) * mpmath.binomial(N, k)
                                  * P ** (k + n) * Q ** (N - k - n))
                out[n, col] = float((-1) ** n * amp * vals[n])
    return out


def krawtchouk_wavefunctions(N: int, p: float) -> np.ndarray:
    """Closed-form ``phi[n, k]`` of the Krawtchouk chain (omega_k = k).

    ``phi_n(k) = (-1)^n sqrt(C(N,n) C(N,k) p^(k+n) (1-p)^(N-k-n)) K_n(k; p, N)``
    with ``K_n`` from the three-term recurrence at ``30 + N`` digits.
    Cost grows like N^3; intended for N up to a few hundred.
    """
    return _krawtchouk_phi_mp(N, p, N, range(N + 1))


def homogeneous_wavefunctions(N: int, J: float = 1.0, B: float = 0.0):
    """Closed-form spectrum and ``phi[n, k]`` for the uniform chain, ascending order.

    The textbook formula ``omega = B + 2J cos(pi (k+1)/(N+2))`` runs downward
    in k; ascending index k corresponds to the textbook index N - k.
    """
    k_raw = N - np.arange(N + 1)
    theta = np.pi * (k_raw + 1) / (N + 2)
    omegas = B + 2 * J * np.cos(theta)
    n = np.arange(N + 1)[:, None]
    # sin(theta) U_n(cos theta) = sin((n+1) theta)
    phi = np.sqrt(2.0 / (N + 2)) * np.sin((n + 1) * theta[None, :])
    return omegas, phi


def closed_form_reference(kind: str, N: int, n: int, k: int, *, p: float = 0.5,
                          J: float = 1.0, B: float = 0.0):
    """Closed-form ``(omega_k, phi_n(omega_k))`` for ascending mode index k.

    ``kind`` is ``"krawtchouk"`` (uses ``p``) or ``"homogeneous"`` (uses
    ``J``, ``B``). Both closed forms already satisfy ``phi_0 > 0``, so they
    agree with :func:`diagonalize` entry by entry.
    """
    if not (0 <= n <= N and 0 <= k <= N):
        raise IndexOutOfRange(f"need 0 <= n, k <= {N}, got n={n}, k={k}")
    if kind == "krawtchouk":
        return float(k), float(_krawtchouk_phi_mp(N, p, max(n, 1), [k])[n, 0])
    if kind == "homogeneous":
        theta = np.pi * (N - k + 1) / (N + 2)
        omega = B + 2 * J * np.cos(theta)
        return float(omega), float(np.sqrt(2.0 / (N + 2)) * np.sin((n + 1) * theta))
    raise ValueError(f"unknown closed form {kind!r}")


# --------------------------------------------------------------------------
# large chains: leading rows without a full diagonalization
# --------------------------------------------------------------------------
def recurrence_limit(chain: Chain, omegas) -> int:
    """Last row the forward site recurrence can reach safely.

    Mode k is classically allowed at site n when
    ``|omega_k - B_n| < J_{n-1} + J_n``. Once a mode has been allowed and
    becomes forbidden again it decays with n, and the forward recurrence
    amplifies rounding there. The limit is the row before the first such
    site, over all modes.
    """
    w = np.asarray(omegas, dtype=float)
    Jp = np.concatenate([[0.0], chain.J, [0.0]])
    allowed = np.abs(w[None, :] - chain.B[:, None]) < (Jp[:-1] + Jp[1:])[:, None]
    past = np.maximum.accumulate(allowed, axis=0) & ~allowed
    rows = np.flatnonzero(past.any(axis=1))
    return int(rows[0]) - 1 if rows.size else chain.N


def wavefunction_rows(chain: Chain, omegas, log_phi0, n_max: int) -> np.ndarray:
    """Rows ``phi[0..n_max, :]`` from a known spectrum and first row.

    Runs ``J_n phi_{n+1} = (omega - B_n) phi_n - J_{n-1} phi_{n-1}`` forward in
    the site index. Each mode starts in its classically forbidden zone near
    site 0 and grows into the allowed zone, so the forward direction picks
    the dominant solution and stays accurate up to about the middle of the
    chain. Beyond that the same modes decay again; use :func:`diagonalize`.

    ``log_phi0`` is ``ln phi_0(omega_k)`` (``phi_0 > 0`` gauge). Working with
    logarithms matters: edge modes can have ``phi_0`` far below the smallest
    double yet be of order one in the bulk. Columns are rescaled on the fly.

    Raises
    ------
    ConditioningFailure
        If ``n_max`` exceeds :func:`recurrence_limit`.
    """
    if not 0 <= n_max <= chain.N:
        raise IndexOutOfRange(f"n_max={n_max} outside 0..{chain.N}")
    w = np.asarray(omegas, dtype=float)
    limit = recurrence_limit(chain, w)
    if n_max > limit:
        raise ConditioningFailure(
            f"rows beyond {limit} lie past a turning point; the forward recurrence "
            "is unstable there"
        )
    logs = np.array(log_phi0, dtype=float)
    vals = np.empty((n_max + 1, w.size))
    logscale = np.empty((n_max + 1, w.size))
    prev = np.zeros_like(w)
    cur = np.ones_like(w)
    vals[0], logscale[0] = cur, logs
    for n in range(n_max):
        left = chain.J[n - 1] * prev if n > 0 else 0.0
        nxt = ((w - chain.B[n]) * cur - left) / chain.J[n]
        big = np.maximum(np.abs(nxt), np.abs(cur))
        # keep magnitudes near 1; fold the factor into the log scale
        f = np.where(big > 1e100, big, 1.0)
        prev, cur = cur / f, nxt / f
        logs = logs + np.log(f)
        vals[n + 1], logscale[n + 1] = cur, logs
    with np.errstate(under="ignore"):
        out = vals * np.exp(logscale)
    return out


def krawtchouk_rows(N: int, p: float, n_max: int) -> np.ndarray:
    """``phi[0..n_max, :]`` of the Krawtchouk chain for N in the thousands.

    The first row is the square root of the binomial distribution,
    ``phi_0(k)^2 = C(N,k) p^k (1-p)^(N-k)``; the rest follow from
    :func:`wavefunction_rows`. Reaches a little past ``N/2`` at ``p = 1/2``;
    for skewed ``p`` the reliable range is shorter (see
    :func:`recurrence_limit`).
    """
    k = np.arange(N + 1)
    logw = (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)
            + k * np.log(p) + (N - k) * np.log1p(-p))
    return wavefunction_rows(krawtchouk_chain(N, p), k.astype(float), 0.5 * logw, n_max)

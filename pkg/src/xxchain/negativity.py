"""
Fermionic logarithmic negativity between two disjoint regions of a chain.

Everything is computed from the ground-state two-point matrix C restricted
to ``A1 u A2`` through the covariance matrix ``J = 2C - I``. Partial time
reversal on A1 flips the sign of ``J11`` and multiplies the off-diagonal
blocks by ``+-i``, giving ``J+`` and ``J-``. With

    Jx = (I + J+ J-)^-1 (J+ + J-)

``E_f`` follows from the eigenvalues of ``Jx`` and of ``J``.

Also here: the leading-order single-site ("skeletal") shortcut
``E_f ~ 2 |C_mn|^2 / (1 + 2 (rho - 1) rho)`` and large-N asymptotics of
``C_mn`` in the Krawtchouk chain, used as references for sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cholesky, eigvalsh, solve_triangular, svdvals

from .chain import SpectralData, krawtchouk_rows
from .entanglement import CorrelationMatrix, correlation_matrix
from .errors import ImaginaryLeak, InsufficientPoints, SingularResolvent

__all__ = [
    "NegativitySetup",
    "CovarianceBlocks",
    "negativity_setup",
    "setup_from_matrix",
    "covariance_blocks",
    "logarithmic_negativity",
    "skeletal_negativity",
    "correlation_asymptotic",
    "negativity_scan_fit",
    "filling_fraction",
    "half_filling",
    "adjacent_intervals",
    "skeletal_pair",
    "correlation_entry",
    "KrawtchoukRows",
    "rows_setup",
]

RESOLVENT_COND_MAX = 1e12
IMAG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NegativitySetup:
    """Two disjoint regions and the two-point matrix over ``A1`` then ``A2``."""

    A1: np.ndarray
    A2: np.ndarray
    C: CorrelationMatrix

    def __post_init__(self):
        a1 = np.asarray(self.A1, dtype=int)
        a2 = np.asarray(self.A2, dtype=int)
        if a1.size == 0 or a2.size == 0:
            raise ValueError("both regions need at least one site")
        if np.any(np.diff(a1) <= 0) or np.any(np.diff(a2) <= 0):
            raise ValueError("regions must be sorted without repeats")
        if np.intersect1d(a1, a2).size:
            raise ValueError("regions overlap")
        if self.C.C.shape != (a1.size + a2.size,) * 2:
            raise ValueError(f"C is {self.C.C.shape}, regions have {a1.size} + {a2.size} sites")
        object.__setattr__(self, "A1", a1)
        object.__setattr__(self, "A2", a2)

    @property
    def ell1(self) -> int:
        return self.A1.size

    @property
    def ell2(self) -> int:
        return self.A2.size

    @property
    def d(self) -> int:
        """Distance between the nearest sites of the two regions."""
        return int(np.min(np.abs(self.A1[:, None] - self.A2[None, :])))

    def swapped(self) -> "NegativitySetup":
        n1 = self.ell1
        order = np.r_[np.arange(n1, n1 + self.ell2), np.arange(n1)]
        C = CorrelationMatrix(self.C.region[order], self.C.C[np.ix_(order, order)], self.C.K)
        return NegativitySetup(self.A2, self.A1, C)


@dataclass(frozen=True, eq=False)
class CovarianceBlocks:
    J: np.ndarray
    ell1: int

    @property
    def J11(self):
        return self.J[: self.ell1, : self.ell1]

    @property
    def J12(self):
        return self.J[: self.ell1, self.ell1:]

    @property
    def J21(self):
        return self.J[self.ell1:, : self.ell1]

    @property
    def J22(self):
        return self.J[self.ell1:, self.ell1:]


def negativity_setup(sd: SpectralData, K: int, A1: Sequence[int], A2: Sequence[int]
                     ) -> NegativitySetup:
    """Ground-state setup (modes 0..K filled) for regions ``A1`` and ``A2``."""
    a1 = np.asarray(A1, dtype=int)
    a2 = np.asarray(A2, dtype=int)
    return NegativitySetup(a1, a2, correlation_matrix(sd, K, np.r_[a1, a2]))


def setup_from_matrix(A1, A2, C, K: int = -1) -> NegativitySetup:
    """Setup from an explicit two-point matrix ordered as ``A1`` then ``A2``."""
    a1 = np.asarray(A1, dtype=int)
    a2 = np.asarray(A2, dtype=int)
    C = np.asarray(C, dtype=float)
    return NegativitySetup(a1, a2, CorrelationMatrix(np.r_[a1, a2], 0.5 * (C + C.T), K))


def covariance_blocks(setup: NegativitySetup) -> CovarianceBlocks:
    """``J = 2C - I`` split at ``ell1``."""
    J = 2.0 * setup.C.C - np.eye(setup.C.C.shape[0])
    return CovarianceBlocks(0.5 * (J + J.T), setup.ell1)


def _principal_sqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


def _jx_general(J, n1):
    """Eigenvalues of ``Jx`` built literally from the complex ``J+-``."""
    n = J.shape[0]
    sign = np.ones(n)
    sign[:n1] = -1.0
    off = np.zeros((n, n), dtype=bool)
    off[:n1, n1:] = True
    off[n1:, :n1] = True
    diag_part = np.where(off, 0.0, J * sign[:, None])
    Jp = diag_part + np.where(off, 1j * J, 0.0)
    Jm = diag_part - np.where(off, 1j * J, 0.0)
    R = np.eye(n) + Jp @ Jm
    cond = np.linalg.cond(R)
    if not cond < RESOLVENT_COND_MAX:
        raise SingularResolvent(f"I + J+ J- has condition number {cond:.3e}")
    return np.linalg.eigvals(np.linalg.solve(R, Jp + Jm))


def _jx_symmetric(J, n1):
    """Half-sums ``sqrt((1+nu)/2)``, ``sqrt((1-nu)/2)`` over the ``Jx`` spectrum.

    Conjugating with ``diag(-i, ..., -i, 1, ..., 1)`` turns ``J+`` into the
    real ``A = [[-J11, J12], [-J21, J22]]`` and ``J-`` into ``A^T``. With
    ``I + A A^T = L L^T``, ``Jx`` is similar to ``M = L^-1 (A + A^T) L^-T``,
    so its spectrum is real. Moreover ``I -+ M = G G^T`` with
    ``G = L^-1 (I -+ A)``, so ``sqrt(1 -+ nu)`` are singular values of G.
    Taking the roots this way keeps them accurate to ~1e-16 absolute; going
    through nu first would leave errors of order sqrt(1e-16) near nu = +-1.
    """
    n = J.shape[0]
    A = J.copy()
    A[:n1, :n1] *= -1.0
    A[n1:, :n1] *= -1.0
    R = np.eye(n) + A @ A.T
    cond = np.linalg.cond(R)
    if not cond < RESOLVENT_COND_MAX:
        raise SingularResolvent(f"I + J+ J- has condition number {cond:.3e}")
    L = cholesky(R, lower=True)
    I = np.eye(n)
    # ascending in nu: sigma(I + A) ascends, sigma(I - A) descends
    plus = np.sort(svdvals(solve_triangular(L, I + A, lower=True)))
    minus = np.sort(svdvals(solve_triangular(L, I - A, lower=True)))[::-1]
    return plus / np.sqrt(2.0), minus / np.sqrt(2.0)


def logarithmic_negativity(setup: NegativitySetup, method: str = "symmetric") -> float:
    """Fermionic logarithmic negativity ``E_f`` of ``A1`` and ``A2``.

    ``E_f = sum_j ln[ sqrt((1+nu_j)/2) + sqrt((1-nu_j)/2) ]
           + 1/2 sum_j ln[ ((1+mu_j)/2)^2 + ((1-mu_j)/2)^2 ]``

    with ``nu_j`` the eigenvalues of ``Jx`` and ``mu_j`` those of J. Square
    roots take the principal branch.

    Parameters
    ----------
    method : {"symmetric", "general"}
        How the ``Jx`` terms are found. The default works with a real
        matrix similar to ``Jx`` and gets the square roots from singular
        values. ``"general"`` forms the complex ``Jx``, calls a non-symmetric
        eigensolver and takes roots of ``1 +- nu``; near ``nu = +-1`` that
        costs about eight digits, and its imaginary residue passes 1e-9 once
        regions reach ~100 sites.

    Raises
    ------
    SingularResolvent
        If ``I + J+ J-`` has condition number above 1e12.
    ImaginaryLeak
        If the first sum keeps an imaginary part above 1e-9.
    """
    blocks = covariance_blocks(setup)
    J = blocks.J
    if method == "symmetric":
        up, down = _jx_symmetric(J, blocks.ell1)
    elif method == "general":
        nu = _jx_general(J, blocks.ell1)
        up, down = _principal_sqrt((1 + nu) / 2), _principal_sqrt((1 - nu) / 2)
    else:
        raise ValueError(f"unknown method {method!r}")
    first = np.sum(np.log(np.asarray(up + down, dtype=complex)))
    if abs(first.imag) > IMAG_TOL:
        raise ImaginaryLeak(f"imaginary residue {first.imag:.3e} in the Jx sum")

    mu = eigvalsh(J)
    second = 0.5 * np.sum(np.log(((1 + mu) / 2) ** 2 + ((1 - mu) / 2) ** 2))
    return float(first.real + second)


def skeletal_negativity(C_mn, rho):
    """Leading-order single-site negativity ``2 |C_mn|^2 / (1 + 2 (rho - 1) rho)``."""
    return 2.0 / (1.0 + 2.0 * (rho - 1.0) * rho) * np.abs(C_mn) ** 2


def filling_fraction(N: int, K: int) -> float:
    """``rho = (K + 1) / (N + 1)``."""
    return (K + 1) / (N + 1)


def half_filling(N: int) -> int:
    """``K = (N+1)//2 - 1``.

    For odd N this fills exactly half of the N+1 modes. For even N the
    middle mode sits at the band center and is left empty, which for a
    particle-hole symmetric chain means filling every negative-energy mode.
    """
    return (N + 1) // 2 - 1


def correlation_asymptotic(kind: str, d, p: float = 0.5, rho: Optional[float] = None):
    """Large-N asymptotics of ``C_mn`` in the Krawtchouk chain.

    ``kind``:

    - ``"bulk"``: ``C_{pN-d/2, pN+d/2} ~ sin(d arcsin(sqrt(rho)) / sqrt(p(1-p))) / (pi d)``;
    - ``"boundary0"``: ``C_{0,d} ~ sin(-pi d/2) / ((2 pi^3)^(1/4) d^(3/4))``;
    - ``"boundary1"``: ``C_{1,d+1} ~ sin(-pi d/2) / ((2 pi^3)^(1/4) d^(5/4))``.

    The boundary forms hold for ``rho = p`` only; ``rho`` defaults to ``p``.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 1):
        raise ValueError("d must be >= 1")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    rho = p if rho is None else rho
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if kind == "bulk":
        return np.sin(d * np.arcsin(np.sqrt(rho)) / np.sqrt(p * (1 - p))) / (np.pi * d)
    if kind in ("boundary0", "boundary1"):
        if not np.isclose(rho, p, rtol=0, atol=1e-12):
            raise ValueError("boundary asymptotics need rho = p")
        power = 0.75 if kind == "boundary0" else 1.25
        # sin(-pi d / 2) without the rounding noise at even d
        s = -np.where(d % 2 == 1, np.where(d % 4 == 1, 1.0, -1.0), 0.0)
        s = np.where(d == np.round(d), s, np.sin(-np.pi * d / 2))
        return s / ((2 * np.pi ** 3) ** 0.25 * d ** power)
    raise ValueError(f"unknown kind {kind!r}")


def negativity_scan_fit(x, y):
    """Least-squares line ``y = slope x + intercept``.

    ``x`` must already be transformed (e.g. ``ln d`` or
    ``ln(l1 l2 / (l1 + l2))``). Returns ``(slope, intercept, r_squared)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    if x.size < 4:
        raise InsufficientPoints(f"need at least 4 points, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    ss_tot = np.sum((y - y.mean()) ** 2)
    flat = ss_tot <= 1e-24 * max(1.0, float(np.sum(y ** 2)))
    r2 = 1.0 if flat else 1.0 - np.sum((y - slope * x - intercept) ** 2) / ss_tot
    return float(slope), float(intercept), float(r2)


# --------------------------------------------------------------------------
# geometry helpers
# --------------------------------------------------------------------------

def adjacent_intervals(N: int, ell1: int, ell2: int, center: str = "bulk"):
    """Two touching intervals of lengths ell1, ell2.

    ``center="bulk"`` puts the shared boundary at the middle site ``N // 2``
    (A1 ends just before it); ``"left"`` starts A1 at site 0.
    """
    if center == "bulk":
        c = N // 2
    elif center == "left":
        c = ell1
    else:
        raise ValueError(f"unknown center {center!r}")
    A1 = np.arange(c - ell1, c)
    A2 = np.arange(c, c + ell2)
    if A1[0] < 0 or A2[-1] > N:
        raise ValueError(f"intervals do not fit in a chain of {N + 1} sites")
    return A1, A2


def skeletal_pair(N: int, d: int, leftmost, p: float = 0.5):
    """Sites ``(m, m + d)`` for a single-site sweep.

    ``leftmost`` is 0 or 1 (boundary pairs) or ``"bulk"``, which centers the
    pair on ``round(p N)``.
    """
    if leftmost == "bulk":
        m = int(round(p * N)) - d // 2
    else:
        m = int(leftmost)
    n = m + d
    if m < 0 or n > N:
        raise ValueError(f"pair ({m}, {n}) does not fit in a chain of {N + 1} sites")
    return m, n


@dataclass(frozen=True, eq=False)
class KrawtchoukRows:
    """Leading wavefunction rows of a large Krawtchouk chain.

    Stands in for :class:`SpectralData` when only correlations between sites
    near the left end or the middle are needed; see
    :func:`xxchain.chain.krawtchouk_rows`.
    """

    N: int
    p: float
    phi: np.ndarray

    @classmethod
    def build(cls, N: int, p: float, n_max: int) -> "KrawtchoukRows":
        return cls(int(N), float(p), krawtchouk_rows(N, p, n_max))


def correlation_entry(source, K: int, m: int, n: int) -> float:
    """Single ``C_mn`` from :class:`SpectralData` or :class:`KrawtchoukRows`."""
    return float(source.phi[m, : K + 1] @ source.phi[n, : K + 1])


def rows_setup(rows: KrawtchoukRows, K: int, A1, A2) -> NegativitySetup:
    """Like :func:`negativity_setup` but from :class:`KrawtchoukRows`."""
    a1 = np.asarray(A1, dtype=int)
    a2 = np.asarray(A2, dtype=int)
    region = np.r_[a1, a2]
    sub = rows.phi[region, : K + 1]
    return setup_from_matrix(a1, a2, sub @ sub.T, K)

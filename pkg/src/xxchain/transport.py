"""
Boundary-driven heat transport through an XX chain.

The chain's end sites 0 and N are weakly coupled (strength ``lam``) to
bosonic baths at temperatures ``T0`` and ``TN``. In the global Lindblad
description each normal mode k relaxes independently with gain and loss
rates ``d_tilde[k]`` and ``d[k]``; the steady state is diagonal in the mode
occupation basis. Smearing functions are taken constant (``h``) on the
chain's spectrum, and the Lamb-shift term is ignored.

All formulas need a strictly positive one-body spectrum (Bose-Einstein
occupations diverge at zero energy); :func:`shift_to_positive` moves every
field by the same constant, which shifts the spectrum rigidly and leaves the
wavefunctions untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .chain import Chain, SpectralData, diagonalize
from .errors import GradientTooLarge, NonPositiveSpectrum, NotMirrorSymmetric

__all__ = [
    "BathConfig",
    "DissipatorRates",
    "bose_einstein",
    "shift_to_positive",
    "dissipator_rates",
    "steady_state_occupations",
    "steady_state_weight",
    "heat_current_general",
    "heat_current_mirror",
    "conductivity",
    "low_temperature_conductivity",
    "high_temperature_conductivity",
    "fit_power_law",
    "transport_exponent",
]

AUTO_SHIFT_GAP = 0.5


@dataclass(frozen=True)
class BathConfig:
    """Bath temperatures, system-bath coupling ``lam`` and smearing amplitude ``h``."""

    T0: float
    TN: float
    lam: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        if not (self.T0 > 0 and self.TN > 0):
            raise ValueError("bath temperatures must be positive")
        if not (self.lam > 0 and self.h > 0):
            raise ValueError("lam and h must be positive")


@dataclass(frozen=True, eq=False)
class DissipatorRates:
    """Per-mode loss (``d``) and gain (``d_tilde``) rates, without the lam^2 prefactor."""

    d: np.ndarray
    d_tilde: np.ndarray


def bose_einstein(omega, T):
    """``1 / (exp(omega / T) - 1)``, overflow-free for large ``omega / T``."""
    x = np.asarray(omega, dtype=float) / T
    return np.exp(-x) / -np.expm1(-x)


# energies below this fraction of the band scale count as zero
ZERO_ENERGY_RTOL = 1e-12


def _require_positive(omegas):
    if np.any(omegas <= ZERO_ENERGY_RTOL * np.max(np.abs(omegas))):
        raise NonPositiveSpectrum(
            f"lowest mode energy {omegas.min():.6g} <= 0; shift the fields first"
        )


def shift_to_positive(chain: Chain, gap: float = AUTO_SHIFT_GAP,
                      sd: Optional[SpectralData] = None) -> Chain:
    """Shift all fields so the lowest mode sits at ``omega_0 = gap``."""
    if sd is None:
        sd = diagonalize(chain)
    return chain.shifted(gap - sd.omegas[0])


def dissipator_rates(sd: SpectralData, bath: BathConfig) -> DissipatorRates:
    """Rates ``d_k = sum_a 2 pi phi_a^2 h^2 (n_a + 1)`` and ``d~_k = sum_a 2 pi phi_a^2 h^2 n_a``.

    The sum runs over the two baths a in {0, N}.
    """
    w = sd.omegas
    _require_positive(w)
    n0 = bose_einstein(w, bath.T0)
    nN = bose_einstein(w, bath.TN)
    g0 = 2 * np.pi * bath.h ** 2 * sd.phi[0] ** 2
    gN = 2 * np.pi * bath.h ** 2 * sd.phi[-1] ** 2
    return DissipatorRates(g0 * (n0 + 1) + gN * (nN + 1), g0 * n0 + gN * nN)


def steady_state_occupations(rates: DissipatorRates) -> np.ndarray:
    """Mean steady-state occupation ``d~_k / (d_k + d~_k)`` of every mode."""
    return rates.d_tilde / (rates.d + rates.d_tilde)


def steady_state_weight(config, rates: DissipatorRates) -> float:
    """Steady-state probability of the mode configuration ``config`` (0/1 per mode).

    ``prod_k (n_k d~_k + (1 - n_k) d_k) / prod_k (d_k + d~_k)``.
    """
    n = np.asarray(config)
    if n.shape != rates.d.shape:
        raise ValueError(f"config has shape {n.shape}, expected {rates.d.shape}")
    num = np.where(n == 1, rates.d_tilde, rates.d)
    return float(np.prod(num / (rates.d + rates.d_tilde)))


def heat_current_general(sd: SpectralData, bath: BathConfig) -> float:
    """Heat current out of the left bath for an arbitrary chain.

    ``2 pi h^2 lam^2 sum_k w phi0^2 phiN^2 (n0 - nN) / (phi0^2 (2 n0 + 1) + phiN^2 (2 nN + 1))``.
    The right-bath current is its negative.
    """
    w = sd.omegas
    _require_positive(w)
    a = sd.phi[0] ** 2
    b = sd.phi[-1] ** 2
    n0 = bose_einstein(w, bath.T0)
    nN = bose_einstein(w, bath.TN)
    den = a * (2 * n0 + 1) + b * (2 * nN + 1)
    num = w * a * b * (n0 - nN)
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(2 * np.pi * bath.h ** 2 * bath.lam ** 2 * terms.sum())


def _sinh_ratio(a, b):
    """sinh(a) / sinh(b) for b > |a| >= 0, without overflow."""
    s = np.sign(a)
    a = np.abs(a)
    with np.errstate(invalid="ignore"):
        r = np.exp(a - b) * np.expm1(-2 * a) / np.expm1(-2 * b)
    return s * np.where(a == 0, 0.0, r)


def heat_current_mirror(sd: SpectralData, bath: BathConfig, tol: float = 1e-10) -> float:
    """Left heat current of a mirror-symmetric chain.

    ``pi h^2 lam^2 <0| Lambda sinh((bN - b0) Lambda / 2) / sinh((b0 + bN) Lambda / 2) |0>``,
    evaluated in the eigenbasis. Mirror symmetry is checked spectrally
    through ``phi_0(w_k)^2 = phi_N(w_k)^2``.
    """
    w = sd.omegas
    _require_positive(w)
    a = sd.phi[0] ** 2
    if np.max(np.abs(a - sd.phi[-1] ** 2)) > tol:
        raise NotMirrorSymmetric("phi_0^2 and phi_N^2 differ; use heat_current_general")
    b0, bN = 1.0 / bath.T0, 1.0 / bath.TN
    ratio = _sinh_ratio((bN - b0) * w / 2, (b0 + bN) * w / 2)
    return float(np.pi * bath.h ** 2 * bath.lam ** 2 * np.sum(w * a * ratio))


def conductivity(chain: Chain, T: float, dT: float, *, lam: float = 1.0, h: float = 1.0,
                 max_ratio: float = 0.01, sd: Optional[SpectralData] = None) -> float:
    """Linear-response conductivity ``kappa = h_L N / (T0 - TN)``.

    ``T0 = T + dT/2`` and ``TN = T - dT/2``. The chain's spectrum must be
    positive.

    Raises
    ------
    GradientTooLarge
        If ``dT > max_ratio * T``.
    """
    if not dT > 0:
        raise ValueError("dT must be positive")
    if dT > max_ratio * T:
        raise GradientTooLarge(f"dT = {dT:g} exceeds {max_ratio:g} * T = {max_ratio * T:g}")
    if sd is None:
        sd = diagonalize(chain)
    bath = BathConfig(T + dT / 2, T - dT / 2, lam, h)
    return heat_current_general(sd, bath) * chain.N / dT


def low_temperature_conductivity(chain: Chain, T: float, *, lam: float = 1.0, h: float = 1.0,
                                 sd: Optional[SpectralData] = None) -> float:
    """Asymptotic ``pi lam^2 h^2 N / T^2 <0| Lambda^2 exp(-Lambda / T) |0>`` for T << 1."""
    if sd is None:
        sd = diagonalize(chain)
    w = sd.omegas
    val = np.sum(sd.phi[0] ** 2 * w ** 2 * np.exp(-w / T))
    return float(np.pi * lam ** 2 * h ** 2 * chain.N / T ** 2 * val)


def high_temperature_conductivity(chain: Chain, T: float, *, lam: float = 1.0,
                                  h: float = 1.0) -> float:
    """Asymptotic ``pi lam^2 h^2 N B_0 / (2 T)`` for T >> 1 (mirror-symmetric chains)."""
    return float(np.pi * lam ** 2 * h ** 2 * chain.N * chain.B[0] / (2 * T))


def fit_power_law(x, y):
    """Least-squares slope of ``ln y`` against ``ln x``.

    Returns ``(exponent, r_squared)``.
    """
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    # constant data: ss_tot is pure rounding and the ratio meaningless
    flat = ss_tot <= 1e-24 * max(1.0, float(np.sum(ly ** 2)))
    r2 = 1.0 if flat else 1.0 - np.sum(resid ** 2) / ss_tot
    return float(slope), float(r2)


def transport_exponent(family: Callable[[int], Chain], N_list: Iterable[int], T: float,
                       dT: float, *, lam: float = 1.0, h: float = 1.0,
                       shift: Optional[float] = AUTO_SHIFT_GAP):
    """Fit ``kappa ~ N^exponent`` over a family of chains.

    Parameters
    ----------
    family : callable
        ``N -> Chain``.
    shift : float or None
        If not None, each chain is first shifted so its lowest mode sits at
        this energy (see :func:`shift_to_positive`).

    Returns
    -------
    exponent, r_squared, kappas
    """
    N_list = list(N_list)
    if len(N_list) < 4:
        raise ValueError("need at least four chain lengths")
    kappas = []
    for N in N_list:
        chain = family(N)
        sd = diagonalize(chain)
        if shift is not None:
            chain = chain.shifted(shift - sd.omegas[0])
            sd = SpectralData(sd.omegas + (shift - sd.omegas[0]), sd.phi)
        kappas.append(conductivity(chain, T, dT, lam=lam, h=h, sd=sd))
    kappas = np.array(kappas)
    exponent, r2 = fit_power_law(N_list, kappas)
    return exponent, r2, kappas

"""Randomized invariants over generated chains."""

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from xxchain.chain import Chain, diagonalize, eigen_residual, orthonormality_residual
from xxchain.entanglement import (
    correlation_matrix,
    entanglement_entropy,
    fit_affine_spectrum,
    interval,
)
from xxchain.negativity import logarithmic_negativity, negativity_setup
from xxchain.pst import (
    mirror_symmetry_residual,
    pst_spectrum,
    pst_verdict,
    synthesize_from_spectrum,
    transfer_fidelity,
)
from xxchain.transport import (
    BathConfig,
    heat_current_general,
    heat_current_mirror,
    shift_to_positive,
)

settings.register_profile("xx", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("xx")

floats = st.floats

# round trips through the spectrum lose about eps * |Lambda| / gap; chains
# made of weakly coupled halves have tunnel splittings far below 1e-3
MIN_GAP = 1e-3


def well_separated(sd):
    return np.min(np.diff(sd.omegas)) > MIN_GAP


@st.composite
def chains(draw, n_min=1, n_max=30):
    N = draw(st.integers(n_min, n_max))
    J = draw(st.lists(floats(0.3, 2.0), min_size=N, max_size=N))
    B = draw(st.lists(floats(-1.5, 1.5), min_size=N + 1, max_size=N + 1))
    return Chain(J, B)


@st.composite
def mirror_chains(draw, n_min=1, n_max=30):
    N = draw(st.integers(n_min, n_max))
    hJ = draw(st.lists(floats(0.5, 2.0), min_size=(N + 1) // 2, max_size=(N + 1) // 2))
    hB = draw(st.lists(floats(-1.0, 1.0), min_size=N // 2 + 1, max_size=N // 2 + 1))
    J = np.r_[hJ, hJ[: N // 2][::-1]]
    B = np.r_[hB, hB[: (N + 1) // 2][::-1]]
    return Chain(J, B)


# --- spectra -------------------------------------------------------------------

@given(chains())
def test_diagonalization_invariants(chain):
    sd = diagonalize(chain)
    assert orthonormality_residual(sd) < 1e-12
    assert eigen_residual(chain, sd) < 1e-10 * max(np.max(np.abs(sd.omegas)), 1e-300)
    assert np.all(sd.phi[0] > 0)
    assert abs(sd.omegas.sum() - chain.B.sum()) <= 1e-10 * max(np.abs(chain.B).sum(), 1.0)


@given(chains(), floats(0, 100))
def test_fidelity_bounded(chain, t):
    assert transfer_fidelity(diagonalize(chain), t) <= 1 + 1e-12


# --- synthesis ---------------------------------------------------------------------

@given(mirror_chains())
def test_round_trip_mirror_chain(chain):
    assert mirror_symmetry_residual(chain) == 0
    sd = diagonalize(chain)
    assume(well_separated(sd))
    back = synthesize_from_spectrum(sd.omegas)
    assert np.max(np.abs(back.J - chain.J)) < 1e-7
    assert np.max(np.abs(back.B - chain.B)) < 1e-7


@given(st.lists(floats(0.2, 3.0), min_size=1, max_size=30), floats(-5, 5))
def test_round_trip_spectrum_and_shift(gaps, x0):
    w = x0 + np.r_[0.0, np.cumsum(gaps)]
    c = synthesize_from_spectrum(w)
    assert np.max(np.abs(diagonalize(c).omegas - w)) <= 1e-8 * np.max(np.abs(w))
    s = synthesize_from_spectrum(w + 2.5)
    assert np.allclose(s.J, c.J, atol=1e-8) and np.allclose(s.B, c.B + 2.5, atol=1e-8)


@given(st.lists(st.sampled_from([1, 3, 5]), min_size=1, max_size=20))
def test_pst_soundness(M):
    c = synthesize_from_spectrum(pst_spectrum(M, np.pi))
    v = pst_verdict(c, np.pi)
    assert v.verdict and transfer_fidelity(diagonalize(c), np.pi) >= 1 - 1e-9


# --- transport ---------------------------------------------------------------------

@given(mirror_chains(n_max=15), floats(0.1, 20), floats(0.1, 20))
def test_mirror_current_identity_and_antisymmetry(chain, T0, TN):
    sd = diagonalize(shift_to_positive(chain))
    assume(well_separated(sd))
    bath = BathConfig(T0, TN, lam=0.4, h=1.1)
    g = heat_current_general(sd, bath)
    m = heat_current_mirror(sd, bath)
    assume(g != 0)
    assert abs(g - m) < 1e-10 * abs(g)
    assert heat_current_mirror(sd, BathConfig(TN, T0, lam=0.4, h=1.1)) == -m


@given(chains(n_max=15), floats(0.1, 20), floats(0.1, 20))
def test_current_sign_and_scaling(chain, T0, TN):
    sd = diagonalize(shift_to_positive(chain))
    a = heat_current_general(sd, BathConfig(T0, TN, h=1.0))
    b = heat_current_general(sd, BathConfig(T0, TN, h=2.0))
    assert np.sign(a) == np.sign(T0 - TN) or a == 0
    assert abs(b - 4 * a) <= 1e-12 * abs(b)


# --- entanglement ----------------------------------------------------------------------

@given(chains(n_min=2), st.data())
def test_entropy_bounds_and_complement(chain, data):
    N = chain.N
    sd = diagonalize(chain)
    K = data.draw(st.integers(0, N))
    ell = data.draw(st.integers(0, N - 1))
    S = entanglement_entropy(correlation_matrix(sd, K, interval(ell)))
    S_rest = entanglement_entropy(correlation_matrix(sd, K, np.arange(ell + 1, N + 1)))
    assert -1e-12 <= S <= (ell + 1) * np.log(2) + 1e-12
    assert abs(S - S_rest) < 1e-8


@given(floats(-3, 3), floats(0.5, 4), st.integers(3, 30))
def test_affine_fit_fixed_point(a0, a1, n):
    t = np.linspace(-2, 2, n)
    gamma = 1 / (1 + np.exp(a0 + a1 * t))
    fit = fit_affine_spectrum(t, gamma)
    assert abs(fit.alpha0 - a0) < 1e-8 and abs(fit.alpha1 - a1) < 1e-8


# --- negativity --------------------------------------------------------------------------

@given(chains(n_min=3, n_max=25), st.data())
def test_negativity_nonnegative_and_symmetric(chain, data):
    N = chain.N
    sd = diagonalize(chain)
    K = data.draw(st.integers(0, N))
    sites = data.draw(st.lists(st.integers(0, N), min_size=2, max_size=min(N + 1, 12), unique=True))
    cut = data.draw(st.integers(1, len(sites) - 1))
    A1, A2 = sorted(sites[:cut]), sorted(sites[cut:])
    s = negativity_setup(sd, K, A1, A2)
    E = logarithmic_negativity(s)
    assert E >= -1e-10
    assert abs(E - logarithmic_negativity(s.swapped())) <= 1e-12 * max(1.0, abs(E))

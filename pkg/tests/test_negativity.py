import mpmath as mp
import numpy as np
import pytest

from xxchain.chain import diagonalize, krawtchouk_chain
from xxchain.entanglement import correlation_matrix
from xxchain.errors import InsufficientPoints
from xxchain.negativity import (
    KrawtchoukRows,
    adjacent_intervals,
    correlation_asymptotic,
    correlation_entry,
    covariance_blocks,
    filling_fraction,
    half_filling,
    logarithmic_negativity,
    negativity_scan_fit,
    negativity_setup,
    rows_setup,
    setup_from_matrix,
    skeletal_negativity,
    skeletal_pair,
)


def renyi_half(gamma):
    g = np.clip(gamma, 0, 1)
    return float(np.sum(2 * np.log(np.sqrt(g) + np.sqrt(1 - g))))


def negativity_mp(n1, C, dps=40):
    """Literal complex-matrix evaluation in extended precision."""
    with mp.workdps(dps):
        n = C.shape[0]
        J = mp.matrix((2 * C - np.eye(n)).tolist())
        Jp, Jm = mp.matrix(n, n), mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                if (i < n1) != (j < n1):
                    Jp[i, j], Jm[i, j] = 1j * J[i, j], -1j * J[i, j]
                else:
                    s = -1 if i < n1 else 1
                    Jp[i, j] = Jm[i, j] = s * J[i, j]
        Jx = mp.inverse(mp.eye(n) + Jp * Jm) * (Jp + Jm)
        nu = mp.eig(Jx, left=False, right=False)
        first = sum(mp.log(mp.sqrt((1 + v) / 2) + mp.sqrt((1 - v) / 2)) for v in nu)
        mu, _ = mp.eigsy(J)
        second = sum(mp.log(((1 + m) / 2) ** 2 + ((1 - m) / 2) ** 2) for m in mu) / 2
        return float(mp.re(first + second))


def random_projector_block(rng, n_sites, n_occ, region):
    Q, _ = np.linalg.qr(rng.normal(size=(n_sites, n_occ)))
    C = Q @ Q.T
    return C[np.ix_(region, region)]


# --- simple states ---------------------------------------------------------

def test_shared_fermion_gives_ln2():
    s = setup_from_matrix([0], [1], [[0.5, 0.5], [0.5, 0.5]])
    assert logarithmic_negativity(s) == pytest.approx(np.log(2), abs=1e-12)


def test_product_state_gives_zero():
    s = setup_from_matrix([0], [1], np.diag([1.0, 0.0]))
    assert abs(logarithmic_negativity(s)) < 1e-12
    s = setup_from_matrix([0, 1], [2], np.diag([0.3, 0.8, 0.6]))
    assert abs(logarithmic_negativity(s)) < 1e-12


def test_blocks_layout():
    s = setup_from_matrix([0, 1], [3], np.diag([0.5, 1.0, 0.0]))
    b = covariance_blocks(s)
    assert np.allclose(np.diag(b.J11), [0, 1]) and b.J22.shape == (1, 1)
    assert b.J12.shape == (2, 1) and b.J21.shape == (1, 2)
    assert s.d == 2


def test_setup_validation():
    with pytest.raises(ValueError):
        setup_from_matrix([0, 1], [1], np.eye(3))
    with pytest.raises(ValueError):
        setup_from_matrix([0], [1], np.eye(3))
    with pytest.raises(ValueError):
        setup_from_matrix([], [1], np.eye(1))


# --- oracles ------------------------------------------------------------------

def test_matches_extended_precision():
    rng = np.random.default_rng(2)
    for _ in range(15):
        n = int(rng.integers(2, 8))
        C = random_projector_block(rng, n + 3, int(rng.integers(1, n + 3)), np.arange(n))
        C = 0.5 * (C + C.T)
        cut = int(rng.integers(1, n))
        s = setup_from_matrix(np.arange(cut), np.arange(cut, n), C)
        assert abs(logarithmic_negativity(s) - negativity_mp(cut, C)) < 1e-12


def test_pure_state_matches_renyi_half():
    # a float projector is pure only to ~1e-16, which the square roots turn
    # into ~1e-8 in either quantity, hence the loose tolerance
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(1, n))
        Q, _ = np.linalg.qr(rng.normal(size=(n, k)))
        C = Q @ Q.T
        cut = int(rng.integers(1, n))
        s = setup_from_matrix(np.arange(cut), np.arange(cut, n), C)
        g = np.linalg.eigvalsh(C[:cut, :cut])
        assert logarithmic_negativity(s) == pytest.approx(renyi_half(g), abs=1e-6)


def test_ground_state_pure_bipartition():
    N = 30
    sd = diagonalize(krawtchouk_chain(N, 0.4))
    s = negativity_setup(sd, 11, np.arange(13), np.arange(13, N + 1))
    g = np.linalg.eigvalsh(s.C.C[:13, :13])
    assert logarithmic_negativity(s) == pytest.approx(renyi_half(g), abs=1e-6)


def test_random_mixed_states_nonnegative_and_swap_symmetric():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n_sites = int(rng.integers(4, 14))
        n_occ = int(rng.integers(1, n_sites))
        size = int(rng.integers(2, n_sites + 1))
        region = np.sort(rng.choice(n_sites, size=size, replace=False))
        cut = int(rng.integers(1, size))
        C = random_projector_block(rng, n_sites, n_occ, region)
        s = setup_from_matrix(region[:cut], region[cut:], C)
        E = logarithmic_negativity(s)
        assert E >= -1e-10
        assert abs(E - logarithmic_negativity(s.swapped())) <= 1e-12 * max(1.0, abs(E))


def test_general_route_on_generic_state():
    rng = np.random.default_rng(8)
    C = random_projector_block(rng, 9, 4, np.arange(6))
    s = setup_from_matrix([0, 1, 2], [3, 4, 5], C)
    assert abs(logarithmic_negativity(s, method="general") - logarithmic_negativity(s)) < 1e-6


def test_unknown_method():
    s = setup_from_matrix([0], [1], np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        logarithmic_negativity(s, method="svd")


def test_large_regions_stay_real():
    N = 512
    sd = diagonalize(krawtchouk_chain(N, 0.5))
    A1, A2 = adjacent_intervals(N, 128, 128)
    E = logarithmic_negativity(negativity_setup(sd, half_filling(N), A1, A2))
    assert np.isfinite(E) and E > 0


# --- skeletal regime ------------------------------------------------------------------

def test_skeletal_ratio_tends_to_one():
    N = 400
    sd = diagonalize(krawtchouk_chain(N, 0.5))
    K = half_filling(N)
    rho = filling_fraction(N, K)
    ratios = []
    for d in (5, 15, 31, 63):
        m, n = skeletal_pair(N, d, "bulk")
        s = negativity_setup(sd, K, [m], [n])
        ratios.append(logarithmic_negativity(s) / skeletal_negativity(correlation_entry(sd, K, m, n), rho))
    dev = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(dev) < 0) and dev[-1] < 1e-3


def test_skeletal_formula_values():
    assert skeletal_negativity(0.1, 0.5) == pytest.approx(0.04)
    assert skeletal_negativity(-0.1, 0.0) == pytest.approx(0.02)


def test_rows_setup_matches_full_diagonalization():
    N = 300
    sd = diagonalize(krawtchouk_chain(N, 0.5))
    rows = KrawtchoukRows.build(N, 0.5, 100)
    a = negativity_setup(sd, 149, [0, 1], [40, 41, 42])
    b = rows_setup(rows, 149, [0, 1], [40, 41, 42])
    assert np.max(np.abs(a.C.C - b.C.C)) < 1e-12
    assert correlation_entry(rows, 149, 0, 41) == pytest.approx(correlation_entry(sd, 149, 0, 41), abs=1e-13)


def test_correlation_entry_matches_matrix():
    sd = diagonalize(krawtchouk_chain(20, 0.5))
    C = correlation_matrix(sd, 9).C
    assert correlation_entry(sd, 9, 3, 11) == pytest.approx(C[3, 11], abs=1e-15)


# --- asymptotics and fitting --------------------------------------------------------

def test_bulk_asymptotic_half_filling():
    d = np.arange(1, 12)
    assert np.allclose(correlation_asymptotic("bulk", d), np.sin(np.pi * d / 2) / (np.pi * d), atol=1e-15)


def test_boundary_asymptotic_parity():
    d = np.arange(1, 20)
    for kind, power in (("boundary0", 0.75), ("boundary1", 1.25)):
        v = correlation_asymptotic(kind, d)
        assert np.all(v[1::2] == 0)
        assert v[0] == pytest.approx(-1 / ((2 * np.pi ** 3) ** 0.25))
        assert v[2] == pytest.approx(1 / ((2 * np.pi ** 3) ** 0.25 * 3 ** power))
    with pytest.raises(ValueError):
        correlation_asymptotic("boundary0", 3, p=0.5, rho=0.4)
    with pytest.raises(ValueError):
        correlation_asymptotic("bulk", 0)
    with pytest.raises(ValueError):
        correlation_asymptotic("corner", 3)


def test_scan_fit():
    x = np.log(np.arange(2, 10.0))
    slope, intercept, r2 = negativity_scan_fit(x, 0.25 * x + 0.1)
    assert slope == pytest.approx(0.25) and intercept == pytest.approx(0.1) and r2 == pytest.approx(1)
    assert negativity_scan_fit(x, np.full_like(x, 2.0))[2] == 1.0
    with pytest.raises(InsufficientPoints):
        negativity_scan_fit([1, 2, 3], [1, 2, 3])


def test_filling_helpers():
    assert half_filling(7) == 3 and filling_fraction(7, 3) == 0.5
    assert half_filling(8) == 3


def test_geometry_helpers():
    A1, A2 = adjacent_intervals(20, 3, 4)
    assert list(A1) == [7, 8, 9] and list(A2) == [10, 11, 12, 13]
    A1, A2 = adjacent_intervals(20, 3, 4, center="left")
    assert A1[0] == 0
    with pytest.raises(ValueError):
        adjacent_intervals(10, 8, 8)
    assert skeletal_pair(100, 7, 0) == (0, 7)
    assert skeletal_pair(100, 7, "bulk") == (47, 54)
    with pytest.raises(ValueError):
        skeletal_pair(10, 11, 0)

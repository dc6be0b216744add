import json
import math

import numpy as np
import pytest

from xxchain.chain import (
    Chain,
    SpectralData,
    build_chain,
    chain_to_spec,
    closed_form_reference,
    diagonalize,
    eigen_residual,
    homogeneous_chain,
    homogeneous_wavefunctions,
    krawtchouk_chain,
    krawtchouk_rows,
    krawtchouk_wavefunctions,
    load_chain,
    orthonormality_residual,
    recurrence_limit,
)
from xxchain.errors import (
    ConditioningFailure,
    IndexOutOfRange,
    LengthMismatch,
    NonMonotoneDual,
    NonPositiveCoupling,
)


# --- construction ----------------------------------------------------------

def test_krawtchouk_coefficients_small():
    c = build_chain({"kind": "krawtchouk", "N": 3, "p": 0.5})
    assert np.allclose(c.J, [np.sqrt(3) / 2, 1.0, np.sqrt(3) / 2], atol=1e-15)
    assert np.allclose(c.B, 1.5, atol=1e-15)
    assert np.array_equal(c.dual, np.arange(4.0))


def test_homogeneous_constant_arrays():
    c = build_chain({"kind": "homogeneous", "N": 2, "J": 1.0, "B": 0.0})
    assert np.array_equal(c.J, [1.0, 1.0])
    assert np.array_equal(c.B, [0.0, 0.0, 0.0])
    assert c.dual is not None


def test_custom_without_dual():
    c = build_chain({"kind": "custom", "J": [1], "B": [0, 0]})
    assert c.N == 1 and c.n_sites == 2 and c.dual is None


@pytest.mark.parametrize("J,B,dual,err", [
    ([1.0, 0.0], [0, 0, 0], None, NonPositiveCoupling),
    ([1.0, -2.0], [0, 0, 0], None, NonPositiveCoupling),
    ([1.0], [0, 0, 0], None, LengthMismatch),
    ([1.0], [0, 0], [0.0, 0.0], NonMonotoneDual),
    ([1.0], [0, 0], [0.0], LengthMismatch),
])
def test_chain_validation(J, B, dual, err):
    with pytest.raises(err):
        Chain(J, B, dual)


def test_chain_is_immutable():
    c = krawtchouk_chain(4, 0.5)
    with pytest.raises(ValueError):
        c.J[0] = 3.0


def test_spec_round_trip(tmp_path):
    c = krawtchouk_chain(6, 0.3)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(chain_to_spec(c)))
    back = load_chain(path)
    assert np.array_equal(back.J, c.J) and np.array_equal(back.B, c.B)
    assert np.array_equal(back.dual, c.dual)


def test_unknown_kind():
    with pytest.raises(ValueError):
        build_chain({"kind": "racah", "N": 3})


def test_shift_moves_spectrum_rigidly():
    c = krawtchouk_chain(8, 0.4)
    a, b = diagonalize(c), diagonalize(c.shifted(2.5))
    assert np.allclose(b.omegas, a.omegas + 2.5, atol=1e-12)
    assert np.allclose(b.phi, a.phi, atol=1e-12)


# --- diagonalization -------------------------------------------------------

def test_krawtchouk_linear_spectrum():
    sd = diagonalize(krawtchouk_chain(3, 0.5))
    assert np.allclose(sd.omegas, [0, 1, 2, 3], atol=1e-13)


def test_homogeneous_spectrum_ascending():
    sd = diagonalize(homogeneous_chain(2))
    assert np.allclose(sd.omegas, [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-14)


def test_two_site_by_hand():
    sd = diagonalize(Chain([1.0], [0.0, 0.0]))
    s = 1 / np.sqrt(2)
    assert np.allclose(sd.omegas, [-1, 1])
    assert np.allclose(sd.phi, [[s, s], [-s, s]], atol=1e-15)


@pytest.mark.parametrize("chain", [
    krawtchouk_chain(30, 0.5),
    krawtchouk_chain(40, 0.9),
    homogeneous_chain(25, 0.7, -0.3),
    Chain(np.linspace(0.5, 2.0, 19), np.sin(np.arange(20.0))),
])
def test_spectral_invariants(chain):
    sd = diagonalize(chain)
    assert orthonormality_residual(sd) < 1e-12
    assert np.max(np.abs(sd.phi @ sd.phi.T - np.eye(chain.n_sites))) < 1e-12
    assert eigen_residual(chain, sd) < 1e-10 * np.max(np.abs(sd.omegas))
    assert np.all(np.diff(sd.omegas) > 0)
    assert np.all(sd.phi[0] > 0)
    assert abs(sd.omegas.sum() - chain.B.sum()) < 1e-10 * max(np.abs(chain.B).sum(), 1)


def test_gauge_holds_for_tiny_edge_weights():
    # phi_0 of the extreme modes is ~2^-50 here
    sd = diagonalize(krawtchouk_chain(100, 0.5))
    assert np.all(sd.phi[0] > 0)
    ref = np.sqrt(np.array([math.comb(100, k) for k in range(101)], dtype=float) / 2.0 ** 100)
    assert np.allclose(sd.phi[0] / ref, 1.0, rtol=1e-10)


def test_orthonormality_residual_flags_scaled_column():
    sd = diagonalize(krawtchouk_chain(5, 0.5))
    phi = sd.phi.copy()
    phi[:, 2] *= 2
    assert orthonormality_residual(SpectralData(sd.omegas, phi)) >= 3 - 1e-12


def test_orthonormality_residual_exact_case():
    s = 1 / np.sqrt(2)
    sd = SpectralData(np.array([-1.0, 1.0]), np.array([[s, s], [-s, s]]))
    assert orthonormality_residual(sd) < 1e-15


# --- closed forms ----------------------------------------------------------

def test_closed_form_small_values():
    w, phi = closed_form_reference("homogeneous", 2, 0, 0)
    assert w == pytest.approx(-np.sqrt(2)) and phi == pytest.approx(0.5)
    w, phi = closed_form_reference("krawtchouk", 1, 0, 0, p=0.5)
    assert w == 0 and phi == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_closed_form_index_check():
    with pytest.raises(IndexOutOfRange):
        closed_form_reference("krawtchouk", 3, 4, 0)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("N", [3, 17, 40])
def test_krawtchouk_closed_form_matches(N, p):
    sd = diagonalize(krawtchouk_chain(N, p))
    assert np.allclose(sd.omegas, np.arange(N + 1), atol=1e-10)
    assert np.max(np.abs(krawtchouk_wavefunctions(N, p) - sd.phi)) < 1e-8


@pytest.mark.parametrize("N", [2, 9, 40])
def test_homogeneous_closed_form_matches(N):
    sd = diagonalize(homogeneous_chain(N))
    w, phi = homogeneous_wavefunctions(N)
    assert np.allclose(w, sd.omegas, atol=1e-12)
    assert np.max(np.abs(phi - sd.phi)) < 1e-8


# --- leading rows for large chains ------------------------------------------

def test_rows_match_full_diagonalization():
    N = 300
    sd = diagonalize(krawtchouk_chain(N, 0.5))
    R = krawtchouk_rows(N, 0.5, 150)
    assert np.max(np.abs(R - sd.phi[:151])) < 1e-12


def test_rows_refuse_unstable_range():
    N = 200
    lim = recurrence_limit(krawtchouk_chain(N, 0.9), np.arange(N + 1.0))
    assert 10 < lim < N // 2
    krawtchouk_rows(N, 0.9, lim)
    with pytest.raises(ConditioningFailure):
        krawtchouk_rows(N, 0.9, lim + 1)


def test_rows_normalized_at_large_N():
    R = krawtchouk_rows(4000, 0.5, 2000)
    assert np.max(np.abs(np.sum(R ** 2, axis=1) - 1)) < 1e-10

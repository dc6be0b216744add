"""
Entanglement entropy and the commuting tridiagonal operator
===========================================================

In the ground state with modes 0..K filled, the entanglement of the first
l+1 sites is encoded in the spectrum of the truncated correlation matrix C.
For Krawtchouk chains a tridiagonal matrix T commutes with C, which gives a
well-conditioned way to diagonalize C and suggests h ~ a0 + a1 T for the
entanglement Hamiltonian.
"""

import numpy as np

from xxchain.chain import diagonalize, homogeneous_chain, krawtchouk_chain
from xxchain.entanglement import (
    commutator_residual,
    correlation_matrix,
    entanglement_entropy,
    entanglement_hamiltonian,
    fit_affine_approximation,
    heun_operator,
    interval,
)
from xxchain.negativity import half_filling

###############################################################################
# Entropy of the left half against its length. The growth is logarithmic with
# a prefactor close to 1/6.

ells, S = [], []
for N in range(33, 257, 16):
    sd = diagonalize(krawtchouk_chain(N, 0.5))
    ell = (N - 1) // 2
    ells.append(ell)
    S.append(entanglement_entropy(correlation_matrix(sd, half_filling(N), interval(ell))))
slope = np.polyfit(np.log(np.array(ells) + 1), S, 1)[0]
print(f"S vs ln(l+1): slope {slope:.4f} (1/6 = {1 / 6:.4f})")

###############################################################################
# The commutator vanishes to rounding for the Krawtchouk chain and does not for
# the uniform chain.

N, K, ell = 60, 29, 29
kraw = krawtchouk_chain(N, 0.5)
sd = diagonalize(kraw)
C = correlation_matrix(sd, K, interval(ell))
T = heun_operator(kraw, sd, K, ell)
print(f"Krawtchouk [T,C] residual {commutator_residual(T, C):.1e}")

flat = homogeneous_chain(N)
fsd = diagonalize(flat)
print(f"uniform    [T,C] residual "
      f"{commutator_residual(heun_operator(flat, fsd, K, ell), correlation_matrix(fsd, K, interval(ell))):.1e}")

###############################################################################
# Affine fit of the entanglement energies. The fit matches particle number and
# entropy exactly; the correlation with the T eigenvalues shows how good the
# linear picture is. The slope comes out negative because the filled modes
# sit at positive t.

fit = fit_affine_approximation(C, T)
print(f"a0 = {fit.alpha0:.3e}, a1 = {fit.alpha1:.5f}, Pearson = {fit.pearson:.7f}")
h = entanglement_hamiltonian(C)
print(f"largest |h_nn| {np.abs(np.diag(h.h)).max():.3f}, clamped eigenvalues {h.n_clamped}")

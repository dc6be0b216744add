"""
Negativity between intervals and between single sites
======================================================

The fermionic logarithmic negativity measures entanglement between two
regions when the rest of the chain is traced out. For touching intervals it
grows like (1/4) ln(l1 l2 / (l1 + l2)); for two single sites it decays as a
power of their distance, with a different power near the edge of the chain.
"""

import numpy as np

from xxchain.chain import diagonalize, krawtchouk_chain
from xxchain.negativity import (
    KrawtchoukRows,
    adjacent_intervals,
    correlation_asymptotic,
    correlation_entry,
    filling_fraction,
    half_filling,
    logarithmic_negativity,
    negativity_scan_fit,
    negativity_setup,
    rows_setup,
    skeletal_negativity,
    skeletal_pair,
)

###############################################################################
# Touching intervals of equal length around the middle of a 513-site chain.

N = 512
sd = diagonalize(krawtchouk_chain(N, 0.5))
K = half_filling(N)
ells = np.arange(4, 65, 4)
E = [logarithmic_negativity(negativity_setup(sd, K, *adjacent_intervals(N, l, l))) for l in ells]
coef, _, r2 = negativity_scan_fit(np.log(ells / 2.0), E)
print(f"adjacent intervals: coefficient {coef:.4f} (r2 {r2:.5f})")

###############################################################################
# Single sites in a long chain. Only the first rows of the eigenvector matrix
# are needed, so N = 4000 is cheap.

N = 4000
K = half_filling(N)
rho = filling_fraction(N, K)
rows = KrawtchoukRows.build(N, 0.5, N // 2 + 40)
ds = np.arange(5, 64, 2)
for leftmost in ("bulk", 0, 1):
    E, Esk = [], []
    for d in ds:
        m, n = skeletal_pair(N, d, leftmost)
        E.append(logarithmic_negativity(rows_setup(rows, K, [m], [n])))
        Esk.append(skeletal_negativity(correlation_entry(rows, K, m, n), rho))
    slope = negativity_scan_fit(np.log(ds), np.log(E))[0]
    print(f"leftmost {leftmost!s:>4}: E_f ~ d^{slope:.3f}, exact/leading at d=63: {E[-1] / Esk[-1]:.6f}")

###############################################################################
# The edge correlations themselves against their large-N form.

for d in (11, 21, 41):
    exact = correlation_entry(rows, K, 0, d)
    print(f"C_0,{d}: {exact:+.6e}  asymptotic {correlation_asymptotic('boundary0', d):+.6e}")

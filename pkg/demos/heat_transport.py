"""
Heat transport between two baths
================================

Each end of the chain touches a thermal bath. In the steady state the modes
are independently occupied, and the heat current follows from the edge
weights phi_0(w_k)^2 and phi_N(w_k)^2. This script checks the two current
formulas against each other and looks at how the conductivity grows with N.
"""

import numpy as np

from xxchain.chain import diagonalize, krawtchouk_chain
from xxchain.transport import (
    BathConfig,
    conductivity,
    heat_current_general,
    heat_current_mirror,
    high_temperature_conductivity,
    low_temperature_conductivity,
    shift_to_positive,
    transport_exponent,
)

###############################################################################
# Bath occupations need positive energies, so the fields are shifted until the
# lowest mode sits at 0.5. This moves every level by the same amount.

chain = shift_to_positive(krawtchouk_chain(10, 0.5))
sd = diagonalize(chain)
print("lowest modes:", np.round(sd.omegas[:3], 6))

for T0, TN in [(2, 1), (10, 1), (100, 99), (1, 2)]:
    bath = BathConfig(T0, TN)
    g, m = heat_current_general(sd, bath), heat_current_mirror(sd, bath)
    print(f"T0={T0:>3} TN={TN:>3}: current {g:+.6e}  (mirror formula differs by {abs(g - m) / abs(g):.1e})")

###############################################################################
# Conductivity against length. With the shift applied per chain, the fields of
# the Krawtchouk family grow like N/2, and at high temperature the current
# scales with B_0, so kappa grows faster than linearly.

Ns = range(20, 201, 20)
expo, r2, kappas = transport_exponent(lambda N: krawtchouk_chain(N, 0.5), Ns, T=100.0, dT=1.0)
print(f"\nkappa ~ N^{expo:.3f} (r2 {r2:.5f}) at T=100")

###############################################################################
# The same families against the closed-form limits.

for N in (20, 60, 100):
    c = shift_to_positive(krawtchouk_chain(N, 0.5))
    s = diagonalize(c)
    hi = conductivity(c, 1e4, 1.0, sd=s) / high_temperature_conductivity(c, 1e4)
    lo = conductivity(c, 0.05, 5e-5, sd=s) / low_temperature_conductivity(c, 0.05, sd=s)
    print(f"N={N:>3}: kappa/high-T limit {hi:.5f}, kappa/low-T limit {lo:.5f}")

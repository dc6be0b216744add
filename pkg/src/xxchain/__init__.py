"""
Inhomogeneous XX spin chains in the free-fermion picture.

Submodules
----------
chain         Jacobi matrices, diagonalization, closed-form wavefunctions.
pst           Perfect state transfer checks and spectrum-to-chain synthesis.
transport     Boundary-driven steady state and heat currents.
entanglement  Entropy, entanglement Hamiltonian, Heun operator, affine fit.
negativity    Fermionic logarithmic negativity and correlation asymptotics.
cli           ``xxchain`` command line.
"""

from .chain import (
    Chain,
    SpectralData,
    build_chain,
    closed_form_reference,
    diagonalize,
    homogeneous_chain,
    krawtchouk_chain,
    load_chain,
)
from .entanglement import (
    correlation_matrix,
    entanglement_entropy,
    fit_affine_approximation,
    heun_operator,
    stable_correlation_spectrum,
)
from .negativity import logarithmic_negativity, negativity_setup, skeletal_negativity
from .pst import pst_verdict, synthesize_from_spectrum, transfer_fidelity
from .transport import (
    BathConfig,
    conductivity,
    heat_current_general,
    heat_current_mirror,
    shift_to_positive,
    transport_exponent,
)

__version__ = "0.1.0"

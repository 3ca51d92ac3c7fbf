"""Quadrature conventions and numerical tolerances, fixed in one place.

Convention: x = (a + a†)/√2, p = -i(a - a†)/√2, so [x, p] = i and the
vacuum has var(x) = var(p) = 1/2.  Mean vectors and covariance matrices
are ordered (x1, p1, x2, p2, ...).  Every threshold below is expressed
in this normalization; do not rescale elsewhere.
"""

import numpy as np

# Vacuum quadrature variance under the convention above.
VACUUM_VAR = 0.5

# EPR entanglement bound: var((x_a-x_b)/√2) + var((p_a+p_b)/√2) < 1
# certifies entanglement; the two-mode vacuum sits exactly at 1.
EPR_BOUND = 2.0 * VACUUM_VAR

# Symplectic-form defect allowed for any constructed map, ||S Ω Sᵀ - Ω||_max.
SYMPLECTIC_TOL = 1e-10

# Physicality: symplectic eigenvalues must exceed 1/2 - PHYSICALITY_TOL.
# Loose enough that float drift over long pipelines cannot false-alarm.
PHYSICALITY_TOL = 1e-9

# Covariance symmetry defect allowed at construction (relative).
COV_SYMMETRY_RTOL = 1e-12

# Measured-quadrature variance below this is treated as an upstream
# modeling bug, not a conditioning edge case.
MIN_CONDITION_VAR = 1e-14

# Dissipative-engine rate bookkeeping.  The two nonlocal jump channels
# each carry rate JUMP_RATE_FACTOR * d * Gamma; with the swap rate
# identified as gamma_s = d*Gamma this makes first moments decay as
# exp(-gamma_s t) and covariances relax as exp(-2 gamma_s t), matching
# the pulse-level input-output relations.  (The alternative bookkeeping,
# channel rate d*Gamma, would halve both decay rates.)
JUMP_RATE_FACTOR = 2.0

# Larmor-frequency validity: pulse-level sideband modes are canonical
# and independent only for Omega*T >> 1; flag below this.
OMEGA_T_ADVISORY = 50.0


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard symplectic form Ω for the interleaved (x1,p1,...) ordering."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return out

"""Numerical tolerances and size caps used across the package.

Every threshold lives here so that the tolerance ladder is visible in one
place.  Modules import the names they need instead of hard-coding numbers;
tests reference the same constants when they pin expected behaviour.
"""

# Rank decisions: a singular value sigma_k counts toward the numerical rank
# iff sigma_k > max(matrix dims) * sigma_max * RANK_EPS.  Shared by every
# factorization, span, and support computation.
RANK_EPS = 1e-12

# Dense reconstruction agreement (round trips, oracle comparisons).
RECONSTRUCTION_ATOL = 1e-10

# Agreement of two contraction routes for the same quantity.
CROSS_CHECK_ATOL = 1e-9

# Gauge relations (B = Y^-1 A Y) and symmetry residuals.
GAUGE_ATOL = 1e-8

# Trace preservation of quantum channels.
TRACE_PRESERVING_ATOL = 1e-10

# Projector defect (hermiticity and idempotence).
PROJECTOR_ATOL = 1e-10

# Peripheral-spectrum and eigenvalue-degeneracy resolution.
PERIPHERAL_ATOL = 1e-8
DEGENERACY_ATOL = 1e-8

# Eigensolver residual target for iterative low-spectrum computations.
SOLVER_RESIDUAL_ATOL = 1e-10

# Positive semidefiniteness slack for hermitized boundary states.
PSD_ATOL = 1e-10

# Zero-pair search inside the primitivity-index test: a candidate pair is a
# genuine zero when the minimized objective drops below ZERO_PAIR_TOL, and
# the length is certified zero-free when the minimum over all restarts stays
# above CERTIFIED_MIN.  Values in between are reported as indeterminate.
ZERO_PAIR_TOL = 1e-10
CERTIFIED_MIN = 1e-6
OPTIMIZER_RESTARTS = 64
OPTIMIZER_MAX_SWEEPS = 400

class SizeLimitError(ValueError):
    """A computation was declined because it would exceed a size cap.

    Raised instead of attempting a contraction or factorization whose
    element count passes one of the caps below; callers that sweep over
    instance sizes can catch it and report the instance as size-limited.
    """


# Size caps (element counts unless stated otherwise).
DENSE_EIG_MAX = 4096          # dense eigensolver above this dimension: no
DENSE_STATE_MAX = 2 ** 22     # largest dense state vector we materialize
GAMMA_ENTRIES_MAX = 2 ** 26   # largest boundary-map matrix
SPARSE_DIM_MAX = 2 ** 26      # largest assembled Hamiltonian dimension
PEPS_VIRTUAL_MAX = 2 ** 16    # cap on D**(2L) for torus contractions
PEPS_STATE_MAX = 2 ** 26      # cap on d**(L*L) for dense torus states
MPO_ENTRIES_MAX = 2 ** 22     # cap on a single MPO site tensor


def numerical_rank(singular_values, max_dim):
    """Count singular values above the shared rank threshold.

    ``max_dim`` is the larger dimension of the decomposed matrix.
    """
    import numpy as np

    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > max_dim * s[0] * RANK_EPS))

"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .constants import RANK_EPS, numerical_rank


def hermitize(m):
    """Return the Hermitian part (m + m^dagger) / 2."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def fix_phase(a):
    """Rescale by a unit phase so the largest-magnitude entry is real positive.

    Works on vectors and matrices alike; an all-zero array is returned
    unchanged.
    """
    a = np.asarray(a, dtype=complex)
    flat = a.ravel()
    k = int(np.argmax(np.abs(flat)))
    pivot = flat[k]
    if pivot == 0:
        return a.copy()
    return a * (abs(pivot) / pivot)


def operator_norm(m):
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m), 2))


def matrix_rank(m):
    """Numerical rank at the shared threshold."""
    m = np.asarray(m)
    s = np.linalg.svd(m, compute_uv=False)
    return numerical_rank(s, max(m.shape))


def condition_number(m):
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])


def unitarize(m):
    """Closest unitary in Frobenius norm (polar factor)."""
    u, _, vh = np.linalg.svd(np.asarray(m, dtype=complex))
    return u @ vh


def logm_hermitian(m, support_eps=None):
    """Matrix logarithm of a Hermitian PSD matrix via its eigenbasis.

    Returns ``(log_m, support_rank)``.  Eigenvalues at or below the support
    threshold are skipped (a pseudo-logarithm restricted to the support), so
    rank-deficient inputs do not produce infinities.
    """
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eigh(hermitize(m))
    top = float(w[-1])
    if top <= 0.0:
        raise ValueError("matrix has no positive eigenvalues")
    eps = support_eps if support_eps is not None else m.shape[0] * top * RANK_EPS
    keep = w > eps
    rank = int(np.count_nonzero(keep))
    core = v[:, keep] * np.log(w[keep])
    return core @ v[:, keep].conj().T, rank


def expm_hermitian(m):
    """Matrix exponential of a Hermitian matrix via its eigenbasis."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=complex))
    return (v * np.exp(w)) @ v.conj().T


def rng_stream(seed, *ids):
    """Independent counter-based random stream for (seed, *ids).

    Built on Philox so that instance streams are reproducible and
    order-independent: the seed keys the generator and the instance ids fill
    the counter block.
    """
    mask = (1 << 64) - 1
    words = [0, 0, 0, 0]
    for k, x in enumerate(ids):
        if k >= 4:
            raise ValueError("at most four stream ids")
        words[k] = int(x) & mask
    bg = np.random.Philox(counter=words, key=[int(seed) & mask, 0x9E3779B97F4A7C15])
    return np.random.Generator(bg)


def hermitian_basis(dim):
    """Orthonormal Hermitian basis of dim x dim matrices.

    Hilbert-Schmidt orthonormal with the identity direction first
    (element 0 is 1/sqrt(dim)); the rest are the normalized generalized
    Gell-Mann matrices, all traceless.  Returned as a (dim^2, dim, dim)
    stack.
    """
    mats = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0 / np.sqrt(2.0)
            mats.append(sym)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[i, j] = -1j / np.sqrt(2.0)
            anti[j, i] = 1j / np.sqrt(2.0)
            mats.append(anti)
    for k in range(1, dim):
        diag = np.zeros(dim, dtype=complex)
        diag[:k] = 1.0
        diag[k] = -k
        mats.append(np.diag(diag) / np.sqrt(k * (k + 1)))
    return np.stack(mats)

"""Detectability-lemma operator: matrix-free application, the norm bound
against the exact ground-state projector, and the MPO form of its powers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .constants import (
    DENSE_EIG_MAX,
    MPO_ENTRIES_MAX,
    PROJECTOR_ATOL,
    SizeLimitError,
    numerical_rank,
)
from .linalg import rng_stream
from .mps import MPO_LABELS, Mpo, mpo_multiply
from .parent import LocalHamiltonian, assemble, ground_space, low_spectrum
from .tensor import Tensor

# Dense-norm crossover: below this dimension the operator norm in
# dl_bound_check is taken from a full SVD of the explicitly built matrix.
DENSE_NORM_MAX = 2048


class DlOperator:
    """Layered product of complement projectors Q_i = 1 - P_i on a ring.

    P is the nearest-neighbor projector of a frustration-free chain; L must
    be even so the ring splits into an even layer (pairs starting at even
    sites) and an odd layer (pairs starting at odd sites, including the
    wrapped pair (L-1, 0)).  One application means the odd layer first.
    """

    def __init__(self, pair_projector, L, atol=PROJECTOR_ATOL):
        p = np.asarray(pair_projector, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"expected a square pair projector, got {p.shape}")
        d = math.isqrt(p.shape[0])
        if d * d != p.shape[0]:
            raise ValueError(f"projector dimension {p.shape[0]} is not a perfect square")
        if np.linalg.norm(p - p.conj().T) > atol or np.linalg.norm(p @ p - p) > atol:
            raise ValueError("pair term is not a Hermitian projector")
        if L % 2 != 0 or L < 4:
            raise ValueError("L must be even and at least 4")
        self.pair_projector = p
        self.q = np.eye(d * d, dtype=complex) - p
        self.phys_dim = d
        self.L = int(L)

    def layer_pairs(self, parity):
        start = 0 if parity == "even" else 1
        return [(i, (i + 1) % self.L) for i in range(start, self.L, 2)]

    def hamiltonian(self):
        return assemble(
            LocalHamiltonian(self.pair_projector, ("segment", 2), self.phys_dim), self.L
        )


def _apply_pair(op4, psi, i, j, d, L):
    work = np.tensordot(op4, psi.reshape((d,) * L), axes=([2, 3], [i, j]))
    return np.moveaxis(work, [0, 1], [i, j]).reshape(-1)


def dl_apply(dl, ell, v, adjoint=False):
    """Apply DL^ell (or its adjoint) to a dense vector, matrix free.

    One DL step is the odd layer then the even layer; the adjoint applies
    them in the reverse order.  All layer factors are the same Q reshaped to
    act on each pair of neighboring site axes.
    """
    d, L = dl.phys_dim, dl.L
    psi = np.asarray(v, dtype=complex).reshape(-1)
    if psi.size != d ** L:
        raise ValueError(f"vector has {psi.size} entries, expected {d ** L}")
    q4 = dl.q.reshape(d, d, d, d)
    order = ("odd", "even") if not adjoint else ("even", "odd")
    for _ in range(int(ell)):
        for parity in order:
            for (i, j) in dl.layer_pairs(parity):
                psi = _apply_pair(q4, psi, i, j, d, L)
    return psi


@dataclass(frozen=True)
class DlBoundReport:
    """Both sides of the detectability bound at one (L, ell)."""

    L: int
    ell: int
    lhs: float
    rhs: float
    gap: float
    ground_degeneracy: int
    degenerate_ground_space: bool

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def satisfied(self):
        return self.lhs <= self.rhs + 1e-8


def ground_data(dl, seed=0):
    """Ground-space basis and exact finite-size gap of the projector sum.

    Returned as ``(columns, gap)`` so a sweep over ``ell`` at fixed ``L``
    can compute them once and pass them to :func:`dl_bound_check`.
    """
    ham = dl.hamiltonian()
    _, vecs = ground_space(ham, seed=seed)
    spec = low_spectrum(ham, k=max(4, vecs.shape[1] + 2), seed=seed)
    return vecs, float(spec.gap)


def dl_bound_check(dl, ell, seed=0, ground=None):
    """Compare |Pi_GS - DL^ell| in operator norm with (gap/4 + 1)^{-ell/2}.

    The ground projector and the exact finite-size gap come from the
    assembled Hamiltonian sum of the pair projectors (or from a precomputed
    ``ground`` pair).  A degenerate ground space substitutes its projector
    for the single-state one and is flagged.
    """
    if ground is None:
        ground = ground_data(dl, seed=seed)
    vecs, gap = ground
    dim = vecs.shape[0]

    def matvec(x):
        x = np.asarray(x).reshape(-1)
        return vecs @ (vecs.conj().T @ x) - dl_apply(dl, ell, x)

    def rmatvec(x):
        x = np.asarray(x).reshape(-1)
        return vecs @ (vecs.conj().T @ x) - dl_apply(dl, ell, x, adjoint=True)

    if dim <= DENSE_NORM_MAX:
        cols = [matvec(col) for col in np.eye(dim, dtype=complex)]
        lhs = float(np.linalg.svd(np.stack(cols, axis=1), compute_uv=False)[0])
    else:
        op = spla.LinearOperator((dim, dim), matvec=matvec, rmatvec=rmatvec, dtype=complex)
        rng = rng_stream(seed, 23)
        v0 = rng.standard_normal(dim)
        lhs = float(spla.svds(op, k=1, v0=v0, return_singular_vectors=False)[0])
    rhs = (gap / 4.0 + 1.0) ** (-ell / 2.0)
    return DlBoundReport(
        L=dl.L,
        ell=int(ell),
        lhs=lhs,
        rhs=float(rhs),
        gap=float(gap),
        ground_degeneracy=vecs.shape[1],
        degenerate_ground_space=vecs.shape[1] > 1,
    )


def _split_q(q, d, threshold=None):
    """SVD split of Q across the two sites: Q = sum_k G_k (x) H_k."""
    mat = q.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, s, vh = np.linalg.svd(mat)
    rank = numerical_rank(s, d * d)
    if threshold is not None:
        rank = min(rank, int(np.count_nonzero(s > threshold * s[0])))
        rank = max(rank, 1)
    left = (u[:, :rank] * np.sqrt(s[:rank])).reshape(d, d, rank)
    right = (np.sqrt(s[:rank])[:, None] * vh[:rank]).reshape(rank, d, d)
    return left, right, rank


def _layer_mpo(dl, parity, threshold=None):
    """Single projector layer as a ring MPO with the pair bond interleaved."""
    d, L = dl.phys_dim, dl.L
    left, right, rank = _split_q(dl.q, d, threshold)
    g = Tensor(left.reshape(1, d, d, rank), MPO_LABELS)
    h = Tensor(right.reshape(rank, d, d, 1), MPO_LABELS)
    # Even layer reads g,h,g,h,...; the odd layer reads h,g,...,g so the
    # wrapped pair (L-1, 0) carries its bond through the ring closure.
    tensors = []
    for site in range(L):
        paired_first = (site % 2 == 0) == (parity == "even")
        tensors.append(g if paired_first else h)
    return Mpo(tensors, boundary="periodic")


def dl_as_mpo(dl, ell, threshold=None):
    """DL^ell as a periodic MPO with every bond at most d^{2 ell}.

    Each Q is split by SVD across its two sites (rank at most d^2), the two
    layers become bond-(rank) MPOs, and powers are structural MPO products,
    so the bond bound holds by construction.  ``threshold`` optionally
    truncates the Q split for compression studies.
    """
    d = dl.phys_dim
    _, _, rank = _split_q(dl.q, d, threshold)
    # each even+odd round multiplies every bond by the split rank once
    if (rank ** ell) ** 2 * d * d > MPO_ENTRIES_MAX:
        raise SizeLimitError(
            f"MPO site tensors at ell={ell} would exceed the entry cap {MPO_ENTRIES_MAX}"
        )
    even = _layer_mpo(dl, "even", threshold)
    odd = _layer_mpo(dl, "odd", threshold)
    step = mpo_multiply(even, odd)
    out = step
    for _ in range(int(ell) - 1):
        out = mpo_multiply(out, step)
    return out

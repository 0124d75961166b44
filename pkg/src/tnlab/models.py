"""Reference tensors and operators used across tests and the CLI.

GHZ, AKLT, and cluster-state MPS tensors, the antiparallel Ising pair
projector, copy-tensor and random PEPS sites, and the symmetry data of the
standard SPT examples.
"""

from __future__ import annotations

import numpy as np

from .linalg import rng_stream
from .mps import block_sites, site_tensor
from .tensor import Tensor

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PEPS_LABELS = ("phys", "up", "right", "down", "left")


def ghz_site():
    """GHZ ring tensor: A^0 = |0><0|, A^1 = |1><1| (d = D = 2)."""
    return site_tensor(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex))


def aklt_site():
    """AKLT tensor in the Cartesian spin-1 basis: A^a = sigma_a / sqrt(3).

    Trace preserving as it stands, so its transfer operator is already a
    channel.  Physical index order is (x, y, z).
    """
    return site_tensor(np.array([PAULI_X, PAULI_Y, PAULI_Z]) / np.sqrt(3.0))


def aklt_symmetry():
    """Spin-1 pi rotations about x and z in the Cartesian basis.

    These act on the physical index as the SO(3) rotation matrices
    diag(1,-1,-1) and diag(-1,-1,1); the corresponding virtual operators
    are the Pauli matrices X and Z (anticommuting, hence a nontrivial
    projective class).
    """
    return {
        "x": np.diag([1.0, -1.0, -1.0]).astype(complex),
        "z": np.diag([-1.0, -1.0, 1.0]).astype(complex),
    }


def cluster_site():
    """Cluster-state tensor: the bond carries the previous spin.

    A^s_{l,r} = delta_{r,s} (-1)^{l s}, so a ring trace reproduces the
    amplitudes prod (-1)^{s_i s_{i+1}} of prod CZ |+...+> (unnormalized).
    """
    a0 = np.array([[1.0, 0.0], [1.0, 0.0]], dtype=complex)
    a1 = np.array([[0.0, 1.0], [0.0, -1.0]], dtype=complex)
    return site_tensor(np.array([a0, a1]))


def cluster_blocked_site():
    """Two cluster sites blocked into one d=4 site; injective at one block."""
    return block_sites(cluster_site(), 2)


def cluster_symmetry():
    """Z2 x Z2 spin flips on the even and odd sublattice of a blocked pair."""
    eye = np.eye(2, dtype=complex)
    return {"a": np.kron(PAULI_X, eye), "b": np.kron(eye, PAULI_X)}


def product_site(vector):
    """Bond-dimension-1 site tensor for the product state of ``vector``."""
    v = np.asarray(vector, dtype=complex)
    if v.ndim != 1:
        raise ValueError("expected a state vector")
    return site_tensor(v.reshape(-1, 1, 1))


def ising_pair_projector():
    """Projector onto antiparallel neighbors: |01><01| + |10><10|."""
    return np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)


def random_site(d, bond, seed=0, stream=0):
    """Site tensor with independent standard complex Gaussian entries.

    Generic position: normal with probability one, so these form the
    random ensembles behind the index-bound checks.
    """
    rng = rng_stream(seed, 11, stream)
    mats = rng.standard_normal((d, bond, bond)) + 1j * rng.standard_normal((d, bond, bond))
    return site_tensor(mats / np.sqrt(d * bond))


def copy_peps_site(dim=2):
    """Diagonal copy tensor delta_{p,u,r,d,l}: a GHZ-like PEPS (d = D)."""
    data = np.zeros((dim,) * 5, dtype=complex)
    for k in range(dim):
        data[(k,) * 5] = 1.0
    return Tensor(data, PEPS_LABELS)


def random_peps_site(d, bond, seed=0, stream=0):
    """Rank-5 PEPS tensor with Gaussian entries, labels (phys,up,right,down,left)."""
    rng = rng_stream(seed, 13, stream)
    shape = (d, bond, bond, bond, bond)
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return Tensor(data / np.sqrt(d) / bond, PEPS_LABELS)


def injective_peps_site(bond=2, seed=0, stream=0):
    """Random PEPS tensor with d = D^4, injective on a single site
    generically."""
    return random_peps_site(bond ** 4, bond, seed=seed, stream=stream)

"""Matrix product states and operators on open chains and rings.

Site tensors are rank-3 :class:`~tnlab.tensor.Tensor` values with labels
``(left, phys, right)``; operators use ``(left, out, in, right)``.  A ring
state is the trace of the site-matrix product, an open chain contracts
trivial boundary bonds.  All functions are pure; dense conversions are
guarded by the size caps in :mod:`tnlab.constants`.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np

from .constants import (
    DENSE_STATE_MAX,
    GAUGE_ATOL,
    RECONSTRUCTION_ATOL,
    SizeLimitError,
    numerical_rank,
)
from .linalg import condition_number, fix_phase
from .tensor import Tensor

MPS_LABELS = ("left", "phys", "right")
MPO_LABELS = ("left", "out", "in", "right")

BOUNDARIES = ("open", "periodic")


def site_tensor(matrices):
    """Site tensor from a ``(d, D_left, D_right)`` stack of matrices."""
    arr = np.asarray(matrices, dtype=complex)
    if arr.ndim != 3:
        raise ValueError(f"expected a (d, Dl, Dr) stack, got shape {arr.shape}")
    return Tensor(arr.transpose(1, 0, 2), MPS_LABELS)


def site_matrices(site):
    """The ``(d, D_left, D_right)`` matrix stack of an MPS site tensor."""
    return site.transpose(("phys", "left", "right")).data


def _canonical(t, labels):
    if sorted(t.labels) != sorted(labels):
        raise ValueError(f"site tensor must carry labels {labels}, got {t.labels}")
    return t.transpose(labels)


class Mps:
    """Matrix product state on an open chain or a ring.

    Parameters
    ----------
    tensors : list of Tensor
        Rank-3 site tensors labeled ``(left, phys, right)``.  Neighboring
        bond dimensions must match; an open chain must start and end with
        bond dimension 1, a ring must close consistently.
    boundary : {"open", "periodic"}
    """

    def __init__(self, tensors, boundary="open"):
        if boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        tensors = [_canonical(t, MPS_LABELS) for t in tensors]
        if not tensors:
            raise ValueError("an MPS needs at least one site")
        d = tensors[0].dim("phys")
        for k, t in enumerate(tensors):
            if t.dim("phys") != d:
                raise ValueError("physical dimension must be uniform")
            nxt = tensors[(k + 1) % len(tensors)]
            if k + 1 < len(tensors) and t.dim("right") != nxt.dim("left"):
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")
        first, last = tensors[0], tensors[-1]
        if boundary == "open":
            if first.dim("left") != 1 or last.dim("right") != 1:
                raise ValueError("open boundary requires trivial edge bonds")
        elif first.dim("left") != last.dim("right"):
            raise ValueError("ring closure bond mismatch")
        self.tensors = tensors
        self.boundary = boundary

    @classmethod
    def ring(cls, site, n_sites):
        """Translation-invariant ring built from one site tensor."""
        site = _canonical(site, MPS_LABELS)
        if site.dim("left") != site.dim("right"):
            raise ValueError("ring site tensor needs square virtual dimensions")
        return cls([site] * int(n_sites), boundary="periodic")

    @property
    def n_sites(self):
        return len(self.tensors)

    @property
    def phys_dim(self):
        return self.tensors[0].dim("phys")

    @property
    def bond_dims(self):
        """Bond dimensions, leading edge first: ``[D_0, D_1, ..., D_N]``."""
        return [self.tensors[0].dim("left")] + [t.dim("right") for t in self.tensors]

    def amplitude(self, config):
        """Coefficient of one computational basis configuration."""
        config = list(config)
        if len(config) != self.n_sites:
            raise ValueError(f"expected {self.n_sites} indices, got {len(config)}")
        mats = []
        for t, i in zip(self.tensors, config):
            if not 0 <= int(i) < self.phys_dim:
                raise ValueError(f"configuration entry {i} out of range")
            mats.append(t.data[:, int(i), :])
        prod = reduce(np.matmul, mats)
        if self.boundary == "periodic":
            return complex(np.trace(prod))
        return complex(prod[0, 0])

    def to_dense(self, max_entries=DENSE_STATE_MAX):
        """Dense state vector, physical indices row-major by site."""
        if self.phys_dim ** self.n_sites > max_entries:
            raise SizeLimitError(
                f"dense state would have {self.phys_dim ** self.n_sites} entries "
                f"(cap {max_entries})"
            )
        acc = self.tensors[0].data  # (D0, d, D1): carry (D0, block, Dk)
        acc = acc.reshape(acc.shape[0], -1, acc.shape[2])
        for t in self.tensors[1:]:
            acc = np.tensordot(acc, t.data, axes=([2], [0]))
            acc = acc.reshape(acc.shape[0], -1, acc.shape[3])
        if self.boundary == "periodic":
            return np.einsum("aba->b", acc)
        return acc[0, :, 0]

    def norm(self):
        """Euclidean norm of the represented state."""
        val = _sandwich(self, None, None)
        return math.sqrt(max(val.real, 0.0))

    def __repr__(self):
        return (
            f"Mps(n_sites={self.n_sites}, phys_dim={self.phys_dim}, "
            f"boundary={self.boundary!r}, bonds={self.bond_dims})"
        )


class Mpo:
    """Matrix product operator; site tensors labeled (left, out, in, right)."""

    def __init__(self, tensors, boundary="periodic"):
        if boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        tensors = [_canonical(t, MPO_LABELS) for t in tensors]
        if not tensors:
            raise ValueError("an MPO needs at least one site")
        for k, t in enumerate(tensors[:-1]):
            if t.dim("right") != tensors[k + 1].dim("left"):
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")
        first, last = tensors[0], tensors[-1]
        if boundary == "open":
            if first.dim("left") != 1 or last.dim("right") != 1:
                raise ValueError("open boundary requires trivial edge bonds")
        elif first.dim("left") != last.dim("right"):
            raise ValueError("ring closure bond mismatch")
        self.tensors = tensors
        self.boundary = boundary

    @property
    def n_sites(self):
        return len(self.tensors)

    @property
    def phys_dim(self):
        return self.tensors[0].dim("out")

    @property
    def bond_dims(self):
        return [self.tensors[0].dim("left")] + [t.dim("right") for t in self.tensors]

    def to_dense(self, max_entries=DENSE_STATE_MAX):
        """Dense matrix of the operator (row-major site ordering)."""
        d = self.phys_dim
        dim = d ** self.n_sites
        if dim * dim > max_entries:
            raise SizeLimitError(f"dense operator would have {dim * dim} entries")
        acc = self.tensors[0].data  # axes (l0, o, i, r)
        for t in self.tensors[1:]:
            acc = np.tensordot(acc, t.data, axes=([acc.ndim - 1], [0]))
        # axes now (l0, o0, i0, o1, i1, ..., r)
        if self.boundary == "periodic":
            acc = np.trace(acc, axis1=0, axis2=acc.ndim - 1)
        else:
            acc = acc[0, ..., 0]
        n = self.n_sites
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        return acc.transpose(perm).reshape(dim, dim)


def mpo_multiply(a, b):
    """Operator product ``a @ b`` of two MPOs on matching chains."""
    if a.n_sites != b.n_sites or a.boundary != b.boundary:
        raise ValueError("MPO shapes do not match")
    if a.phys_dim != b.phys_dim:
        raise ValueError("physical dimension mismatch")
    sites = []
    for ta, tb in zip(a.tensors, b.tensors):
        x, y = ta.data, tb.data
        merged = np.einsum("aoxb,cxid->acoibd", x, y)
        la, lb = x.shape[0], y.shape[0]
        ra, rb = x.shape[3], y.shape[3]
        merged = merged.reshape(la * lb, x.shape[1], y.shape[2], ra * rb)
        sites.append(Tensor(merged, MPO_LABELS))
    return Mpo(sites, boundary=a.boundary)


def mpo_apply(m, psi, max_entries=DENSE_STATE_MAX):
    """Apply an MPO to a dense state without densifying the operator.

    The carried intermediate holds (edge bond) x (site bond) x d^n
    entries, so states that fit in memory stay workable even when the
    operator itself would not.
    """
    d = m.phys_dim
    n = m.n_sites
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != d ** n:
        raise ValueError(f"state has {psi.size} entries, operator expects {d ** n}")
    bonds = m.bond_dims
    peak = bonds[0] * max(bonds) * psi.size
    if peak > max_entries:
        raise SizeLimitError(f"applying this MPO carries {peak} entries")
    carry = np.tensordot(m.tensors[0].data, psi.reshape((d,) * n), axes=([2], [0]))
    carry = np.moveaxis(carry, 2, 1)  # (l0, r, o0, i1..)
    for k in range(1, n):
        carry = np.tensordot(carry, m.tensors[k].data, axes=([1, 2 + k], [0, 2]))
        carry = np.moveaxis(carry, -1, 1)
        carry = np.moveaxis(carry, -1, 2 + k)
    if m.boundary == "periodic":
        carry = np.trace(carry, axis1=0, axis2=1)
    else:
        carry = carry[0, 0]
    return carry.reshape(-1)


def from_dense(psi, d, n_sites=None, threshold=0.0):
    """Exact MPS of a dense state via successive Schmidt decompositions.

    The state must be normalized.  Singular values below the shared rank
    threshold are always dropped; a positive relative ``threshold``
    truncates further.  The result is an open-boundary MPS whose dense
    reconstruction matches ``psi`` to within ``n_sites * threshold`` (and to
    numerical precision when ``threshold`` is 0).
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    d = int(d)
    if d < 2:
        raise ValueError("physical dimension must be at least 2")
    n = round(math.log(psi.size, d))
    if d ** n != psi.size:
        raise ValueError(f"state of length {psi.size} is not a {d}-ary chain")
    if n_sites is not None and int(n_sites) != n:
        raise ValueError(f"state has {n} sites, not {n_sites}")
    if abs(np.linalg.norm(psi) - 1.0) > RECONSTRUCTION_ATOL:
        raise ValueError("input state must be normalized")
    tensors = []
    left = 1
    rest = psi.reshape(1, -1)
    for _ in range(n - 1):
        m = rest.reshape(left * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = numerical_rank(s, max(m.shape))
        if threshold and s.size and s[0] > 0:
            keep = min(keep, int(np.count_nonzero(s >= threshold * s[0])))
        keep = max(keep, 1)
        tensors.append(Tensor(u[:, :keep].reshape(left, d, keep), MPS_LABELS))
        rest = s[:keep, None] * vh[:keep]
        left = keep
    tensors.append(Tensor(rest.reshape(left, d, 1), MPS_LABELS))
    return Mps(tensors, boundary="open")


def entanglement_entropy(state, cut, d=None):
    """Von Neumann entropy (natural log) of a bipartition of a pure state.

    ``state`` is a dense normalized vector (with ``d`` given) or an
    :class:`Mps`.  ``cut`` is either an integer ``k`` (the first ``k``
    sites) or an iterable of site indices.
    """
    if isinstance(state, Mps):
        d = state.phys_dim
        psi = state.to_dense()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValueError("zero state")
        psi = psi / nrm
    else:
        if d is None:
            raise ValueError("dense input needs the local dimension d")
        psi = np.asarray(state, dtype=complex).ravel()
        if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
            raise ValueError("input state must be normalized")
    d = int(d)
    n = round(math.log(psi.size, d))
    if d ** n != psi.size:
        raise ValueError("state length is not a power of d")
    if isinstance(cut, (int, np.integer)):
        sites = list(range(int(cut)))
    else:
        sites = sorted(int(s) for s in cut)
    if len(set(sites)) != len(sites) or any(s < 0 or s >= n for s in sites):
        raise ValueError(f"invalid cut {cut} for {n} sites")
    if not sites or len(sites) == n:
        raise ValueError("cut must be a nonempty strict subset of sites")
    rest = [k for k in range(n) if k not in set(sites)]
    block = psi.reshape((d,) * n).transpose(sites + rest)
    m = block.reshape(d ** len(sites), -1)
    s = np.linalg.svd(m, compute_uv=False)
    p = s ** 2
    p = p[p > 1e-16]
    return float(-(p * np.log(p)).sum())


def _sandwich(m, op, site, mpo=None):
    """Transfer-matrix contraction of <psi| O |psi> (unnormalized)."""
    if mpo is not None:
        if mpo.n_sites != m.n_sites or mpo.boundary != m.boundary:
            raise ValueError("MPO does not match the state")
        if mpo.phys_dim != m.phys_dim:
            raise ValueError("physical dimension mismatch")
        mats = None
    transfer = []
    for k, t in enumerate(m.tensors):
        a = t.data  # (Dl, d, Dr)
        if mpo is not None:
            w = mpo.tensors[k].data  # (M, out, in, M')
            tk = np.einsum("mjin,aib,cjd->macnbd", w, a, a.conj())
            dl = tk.shape[0] * tk.shape[1] * tk.shape[2]
            dr = tk.shape[3] * tk.shape[4] * tk.shape[5]
        elif op is not None and k == site:
            tk = np.einsum("ji,aib,cjd->acbd", op, a, a.conj())
            dl = tk.shape[0] * tk.shape[1]
            dr = tk.shape[2] * tk.shape[3]
        else:
            tk = np.einsum("aib,cid->acbd", a, a.conj())
            dl = tk.shape[0] * tk.shape[1]
            dr = tk.shape[2] * tk.shape[3]
        transfer.append(tk.reshape(dl, dr))
    prod = reduce(np.matmul, transfer)
    if m.boundary == "periodic":
        return complex(np.trace(prod))
    return complex(prod[0, 0])


def expectation_value(m, op, site=None):
    """Normalized expectation value of a single-site operator or an MPO.

    ``op`` is either a ``d x d`` matrix acting at ``site`` or an
    :class:`Mpo` on the same chain.  Computed by transfer-matrix
    contraction; the result is divided by the squared norm, so it equals
    ``<psi|O|psi>`` for normalized input.
    """
    norm2 = _sandwich(m, None, None).real
    if norm2 <= 0:
        raise ValueError("state has zero norm")
    if isinstance(op, Mpo):
        return _sandwich(m, None, None, mpo=op) / norm2
    op = np.asarray(op, dtype=complex)
    if op.shape != (m.phys_dim, m.phys_dim):
        raise ValueError(f"operator shape {op.shape} does not match d={m.phys_dim}")
    if site is None or not 0 <= int(site) < m.n_sites:
        raise ValueError("a valid site index is required for a local operator")
    return _sandwich(m, op, int(site)) / norm2


def gauge_transform(m, y):
    """Conjugate every site tensor: ``A^i -> Y^-1 A^i Y``.

    On a ring this leaves the represented state unchanged.  ``y`` must be
    invertible and match the (uniform) bond dimension; a numerically
    singular ``y`` is rejected with its condition number in the message.
    """
    y = np.asarray(y, dtype=complex)
    dims = {t.dim("left") for t in m.tensors} | {t.dim("right") for t in m.tensors}
    if len(dims) != 1:
        raise ValueError("gauge transform needs a uniform bond dimension")
    (dim,) = dims
    if y.shape != (dim, dim):
        raise ValueError(f"gauge matrix shape {y.shape} does not match bond {dim}")
    cond = condition_number(y)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(f"gauge matrix is numerically singular (condition number {cond:.3e})")
    yinv = np.linalg.inv(y)
    sites = [
        Tensor(np.einsum("ab,bic,cd->aid", yinv, t.data, y), MPS_LABELS)
        for t in m.tensors
    ]
    return Mps(sites, boundary=m.boundary)


def block_sites(site, n):
    """Blocked site tensor whose physical index runs over length-``n`` words.

    The word index is row-major: ``A^(i1..in) = A^i1 ... A^in``.
    """
    a = site_matrices(site)
    if a.shape[1] != a.shape[2]:
        raise ValueError("blocking needs square virtual dimensions")
    n = int(n)
    if n < 1:
        raise ValueError("block length must be positive")
    words = a
    for _ in range(n - 1):
        words = np.einsum("wab,ibc->wiac", words, a)
        words = words.reshape(-1, a.shape[1], a.shape[2])
    return site_tensor(words)


def find_gauge(a_site, b_site, atol=GAUGE_ATOL):
    """Invertible ``Y`` with ``B^i = Y^-1 A^i Y`` for all i, or ``None``.

    ``a_site`` must be normal (finite injectivity length); the solver blocks
    words to that length, solves the resulting linear relation by least
    squares through the pseudo-inverse of the word matrix, extracts ``Y``
    from the rank-one structure of the solution, and verifies the
    single-site relation to ``atol``.  ``Y`` is returned with unit Frobenius
    norm and its largest-magnitude entry made real positive; it is unique up
    to that scalar when it exists.
    """
    from .channels import injectivity_index_mps, word_matrix

    a = site_matrices(a_site)
    b = site_matrices(b_site)
    if a.shape != b.shape:
        raise ValueError(f"site tensor shapes differ: {a.shape} vs {b.shape}")
    if a.shape[1] != a.shape[2]:
        raise ValueError("gauge matching needs square virtual dimensions")
    report = injectivity_index_mps(a_site)
    if report.index is None:
        raise ValueError(
            "site tensor is not normal (no finite injectivity length); "
            "block sites or regauge before matching"
        )
    n = report.index
    dim = a.shape[1]
    wa = word_matrix(a, n)
    wb = word_matrix(b, n)
    z = np.linalg.pinv(wa) @ wb  # = Y^-T kron Y when the relation holds
    r = z.reshape(dim, dim, dim, dim).transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)
    _, s, vh = np.linalg.svd(r)
    if s[0] == 0:
        return None
    # r = vec(Y^-T) vec(Y)^T, so the top right-singular row of the SVD is
    # vec(Y) itself up to a phase (the two conjugations cancel)
    y = vh[0].reshape(dim, dim)
    cond = condition_number(y)
    if not np.isfinite(cond) or cond > 1e12:
        return None
    num = sum(np.linalg.norm(y @ bi - ai @ y) ** 2 for ai, bi in zip(a, b))
    den = sum(np.linalg.norm(ai @ y) ** 2 for ai in a)
    if den == 0 or math.sqrt(num / den) > atol:
        return None
    return fix_phase(y)

"""Dense complex tensors with named indices.

Everything else in the package is built on :class:`Tensor`: a dense complex
double-precision array whose axes are identified by string labels instead of
positions.  Index order is a storage detail; operations address indices by
label, and two tensors agree when their data agree after aligning labels.

Tensors are value-like: the wrapped array is frozen at construction and all
operations return new tensors, so instances can be shared freely across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import numerical_rank


class Tensor:
    """A dense complex tensor with distinct string labels, one per axis.

    Parameters
    ----------
    data : array_like
        Anything ``np.asarray`` accepts; stored as complex128, row-major.
    labels : sequence of str
        One label per axis, all distinct.
    """

    __slots__ = ("data", "labels")

    def __init__(self, data, labels):
        arr = np.array(data, dtype=complex)
        labels = tuple(str(label) for label in labels)
        if arr.ndim != len(labels):
            raise ValueError(
                f"got {len(labels)} labels for a rank-{arr.ndim} tensor"
            )
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate index labels in {labels}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.flags.writeable = False
        self.data = arr
        self.labels = labels

    @property
    def rank(self):
        return self.data.ndim

    @property
    def dims(self):
        return self.data.shape

    def axis(self, label):
        """Position of ``label`` in the current storage order."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"no index labeled {label!r} in {self.labels}") from None

    def dim(self, label):
        return self.data.shape[self.axis(label)]

    def rename(self, mapping):
        """Relabel indices; ``mapping`` maps old labels to new ones."""
        unknown = set(mapping) - set(self.labels)
        if unknown:
            raise ValueError(f"cannot rename unknown labels {sorted(unknown)}")
        return Tensor(self.data, tuple(mapping.get(l, l) for l in self.labels))

    def transpose(self, labels):
        """Reorder axes into the given label order (a permutation)."""
        labels = tuple(labels)
        if sorted(labels) != sorted(self.labels):
            raise ValueError(f"{labels} is not a permutation of {self.labels}")
        perm = tuple(self.axis(l) for l in labels)
        return Tensor(self.data.transpose(perm), labels)

    def conj(self):
        return Tensor(self.data.conj(), self.labels)

    def scalar(self):
        """The value of a rank-0 tensor."""
        if self.rank != 0:
            raise ValueError(f"tensor of rank {self.rank} is not a scalar")
        return complex(self.data)

    def norm(self):
        return float(np.linalg.norm(self.data))

    def __repr__(self):
        pairs = ", ".join(f"{l}={d}" for l, d in zip(self.labels, self.dims))
        return f"Tensor({pairs})"


@dataclass(frozen=True)
class FactorizationResult:
    """Outcome of an SVD split across a bipartition of indices.

    ``left`` carries the left labels plus the new bond, ``right`` the bond
    plus the right labels.  ``left @ diag(singular_values) @ right``
    reproduces the input up to ``truncation_error``.
    """

    left: Tensor
    singular_values: np.ndarray
    right: Tensor
    truncation_error: float


def contract(a, b, pairs, rename_b=None):
    """Contract two tensors over the given label pairs.

    Parameters
    ----------
    a, b : Tensor
    pairs : sequence of (label_a, label_b)
        Indices to sum over; dimensions must match pairwise.
    rename_b : dict, optional
        Relabeling applied to ``b`` first, used when surviving labels of the
        two tensors would collide.
    """
    if rename_b:
        b = b.rename(rename_b)
    pairs = list(pairs)
    axes_a = [a.axis(la) for la, _ in pairs]
    axes_b = [b.axis(lb) for _, lb in pairs]
    for (la, lb), ax_a, ax_b in zip(pairs, axes_a, axes_b):
        if a.dims[ax_a] != b.dims[ax_b]:
            raise ValueError(
                f"dimension mismatch contracting {la!r} ({a.dims[ax_a]}) "
                f"with {lb!r} ({b.dims[ax_b]})"
            )
    out_labels = [l for l in a.labels if l not in {la for la, _ in pairs}]
    out_labels += [l for l in b.labels if l not in {lb for _, lb in pairs}]
    if len(set(out_labels)) != len(out_labels):
        raise ValueError(
            f"contraction would produce duplicate labels {out_labels}; "
            "pass rename_b to disambiguate"
        )
    data = np.tensordot(a.data, b.data, axes=(axes_a, axes_b))
    return Tensor(data, out_labels)


def self_contract(a, pairs):
    """Trace over pairs of indices of a single tensor."""
    pairs = list(pairs)
    flat = [l for pair in pairs for l in pair]
    if len(set(flat)) != len(flat):
        raise ValueError("self-contraction pairs must use distinct labels")
    letters = {}
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    next_letter = iter(alphabet)
    for la, lb in pairs:
        if a.dim(la) != a.dim(lb):
            raise ValueError(f"dimension mismatch tracing {la!r} with {lb!r}")
        letters[la] = letters[lb] = next(next_letter)
    out_labels = [l for l in a.labels if l not in letters]
    for l in out_labels:
        letters[l] = next(next_letter)
    spec = "".join(letters[l] for l in a.labels)
    out = "".join(letters[l] for l in out_labels)
    return Tensor(np.einsum(f"{spec}->{out}", a.data), out_labels)


def group_indices(a, groups, names=None):
    """Fuse ordered groups of indices into single indices.

    ``groups`` is an ordered partition of the labels; each group is fused
    row-major into one index.  Default names join the group with ``"*"``
    (singleton groups keep their label).  The inverse is
    :func:`split_index`.
    """
    groups = [tuple(g) for g in groups]
    flat = [l for g in groups for l in g]
    if sorted(flat) != sorted(a.labels):
        raise ValueError(f"{groups} is not a partition of {a.labels}")
    if names is None:
        names = ["*".join(g) if len(g) > 1 else g[0] for g in groups]
    names = [str(n) for n in names]
    if len(names) != len(groups) or len(set(names)) != len(names):
        raise ValueError("group names must be distinct, one per group")
    t = a.transpose(flat)
    shape = []
    pos = 0
    for g in groups:
        size = 1
        for _ in g:
            size *= t.dims[pos]
            pos += 1
        shape.append(size)
    return Tensor(t.data.reshape(shape), names)


def split_index(a, label, new_labels, new_dims):
    """Split one index into several; inverse of :func:`group_indices`."""
    new_labels = tuple(new_labels)
    new_dims = tuple(int(d) for d in new_dims)
    ax = a.axis(label)
    size = 1
    for d in new_dims:
        size *= d
    if size != a.dims[ax]:
        raise ValueError(
            f"cannot split index {label!r} of dimension {a.dims[ax]} "
            f"into {new_dims}"
        )
    shape = a.dims[:ax] + new_dims + a.dims[ax + 1:]
    labels = a.labels[:ax] + new_labels + a.labels[ax + 1:]
    return Tensor(a.data.reshape(shape), labels)


def factorize(a, left_labels, max_rank=None, threshold=None, bond_label="bond"):
    """SVD factorization of a tensor across a bipartition of its indices.

    Singular values below the shared rank threshold are always dropped;
    ``max_rank`` and then the relative ``threshold`` (discard sigma_k <
    threshold * sigma_max) truncate further.  Returns a
    :class:`FactorizationResult`.
    """
    left = [l for l in a.labels if l in set(left_labels)]
    right = [l for l in a.labels if l not in set(left_labels)]
    missing = set(left_labels) - set(a.labels)
    if missing:
        raise ValueError(f"unknown labels {sorted(missing)}")
    if not left or not right:
        raise ValueError("bipartition must be a nonempty strict subset")
    if bond_label in a.labels:
        raise ValueError(f"bond label {bond_label!r} already in use")
    t = a.transpose(left + right)
    nl = len(left)
    ldims = t.dims[:nl]
    rdims = t.dims[nl:]
    m = t.data.reshape(int(np.prod(ldims)), int(np.prod(rdims)))
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = numerical_rank(s, max(m.shape))
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    if threshold is not None and s.size and s[0] > 0:
        keep = min(keep, int(np.count_nonzero(s >= threshold * s[0])))
    truncation_error = float(np.sqrt(np.sum(s[keep:] ** 2)))
    left_t = Tensor(u[:, :keep].reshape(ldims + (keep,)), left + [bond_label])
    right_t = Tensor(vh[:keep].reshape((keep,) + rdims), [bond_label] + right)
    return FactorizationResult(left_t, s[:keep].copy(), right_t, truncation_error)


def contract_network(tensors):
    """Contract a list of tensors over all shared labels.

    Labels appearing in exactly two tensors are summed; labels unique to one
    tensor survive.  Contraction proceeds by folding tensors pairwise in the
    given order, which is adequate at desk scale.
    """
    if not tensors:
        raise ValueError("empty network")
    pool = list(tensors)
    acc = pool.pop(0)
    while pool:
        shared_at = None
        for k, t in enumerate(pool):
            if set(acc.labels) & set(t.labels):
                shared_at = k
                break
        if shared_at is None:
            # disconnected component: outer product with the next tensor
            nxt = pool.pop(0)
            data = np.tensordot(acc.data, nxt.data, axes=0)
            acc = Tensor(data, acc.labels + nxt.labels)
            continue
        nxt = pool.pop(shared_at)
        shared = [l for l in acc.labels if l in set(nxt.labels)]
        acc = contract(acc, nxt, [(l, l) for l in shared])
    return acc


def allclose(a, b, atol=1e-12, rtol=1e-9):
    """Label-aware comparison: align axes by label, then compare entries."""
    if sorted(a.labels) != sorted(b.labels):
        return False
    if a.transpose(b.labels).dims != b.dims:
        return False
    return bool(np.allclose(a.transpose(b.labels).data, b.data, atol=atol, rtol=rtol))

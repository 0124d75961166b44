"""Quantum channels, stochastic embeddings, and index computations.

Covers the primitivity machinery: boolean-power indices of stochastic
patterns, the Wielandt extremal digraph, the embedding of stochastic
matrices as dephasing channels, the spectral primitivity test, and the
search for primitivity and injectivity indices with explicit certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    CERTIFIED_MIN,
    OPTIMIZER_MAX_SWEEPS,
    OPTIMIZER_RESTARTS,
    PERIPHERAL_ATOL,
    RANK_EPS,
    TRACE_PRESERVING_ATOL,
    ZERO_PAIR_TOL,
    SizeLimitError,
    numerical_rank,
)
from .linalg import hermitize, rng_stream
from .mps import site_matrices
from .tensor import Tensor

# Peripheral moduli closer than this are treated as exactly degenerate.
PERIPHERAL_EXACT = 1e-12


class NotNormalizableError(ValueError):
    """The transfer operator cannot be rescaled to a quantum channel."""


@dataclass(frozen=True)
class StochasticMatrix:
    """Column-stochastic matrix: nonnegative entries, every column sums to 1.

    ``entries[i, j]`` is the transition probability j -> i, so the action on
    a distribution is ``entries @ p``.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if np.any(arr < 0):
            raise ValueError("entries must be nonnegative")
        sums = arr.sum(axis=0)
        if not np.allclose(sums, 1.0, atol=1e-12):
            raise ValueError(f"column sums must be 1, got {sums}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_pattern(cls, pattern):
        """Uniform stochastic matrix supported on a 0/1 pattern."""
        pat = np.asarray(pattern, dtype=bool)
        counts = pat.sum(axis=0)
        if np.any(counts == 0):
            raise ValueError("pattern has an empty column; not stochastic")
        return cls(pat.astype(float) / counts)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def pattern(self):
        return self.entries > 0


class QuantumChannel:
    """Completely positive trace-preserving map in Kraus form."""

    def __init__(self, kraus, atol=TRACE_PRESERVING_ATOL):
        arr = np.array(kraus, dtype=complex)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError(f"expected a (m, D, D) Kraus stack, got {arr.shape}")
        ident = np.einsum("iba,ibc->ac", arr.conj(), arr)
        defect = np.linalg.norm(ident - np.eye(arr.shape[1]))
        if defect > atol:
            raise ValueError(f"Kraus operators are not trace preserving (defect {defect:.2e})")
        arr.flags.writeable = False
        self.kraus = arr

    @property
    def dim(self):
        return self.kraus.shape[1]

    @property
    def n_kraus(self):
        return self.kraus.shape[0]

    def apply(self, rho):
        """Schroedinger action: sum_i A_i rho A_i^dagger."""
        return np.einsum("iab,bc,idc->ad", self.kraus, np.asarray(rho, dtype=complex), self.kraus.conj())

    def apply_adjoint(self, x):
        """Heisenberg action: sum_i A_i^dagger x A_i."""
        return np.einsum("iba,bc,icd->ad", self.kraus.conj(), np.asarray(x, dtype=complex), self.kraus)

    def apply_n(self, rho, n):
        out = np.asarray(rho, dtype=complex)
        for _ in range(int(n)):
            out = self.apply(out)
        return out

    def matrix(self):
        """Matrix of the map on row-major vectorized density operators."""
        return sum(np.kron(a, a.conj()) for a in self.kraus)

    def __repr__(self):
        return f"QuantumChannel(dim={self.dim}, n_kraus={self.n_kraus})"


@dataclass(frozen=True)
class IndexReport:
    """Outcome of an index search (primitivity or injectivity).

    ``index`` is None when no index was found; ``status`` is one of
    ``"found"``, ``"not-found"``, ``"indeterminate"``, or ``"size-limited"``
    (scan stopped at a size cap); ``certificate`` records the per-length
    evidence behind the verdict.
    """

    index: int | None
    n_searched: int
    status: str
    certificate: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectralCertificate:
    """Spectral evidence for primitivity of a channel.

    status: "primitive", "not-primitive", or "indeterminate" (borderline
    peripheral moduli that the tolerance cannot resolve).
    """

    status: str
    moduli: tuple
    peripheral_count: int
    modulus_gap: float
    fixed_point_rank: int | None
    dim: int

    @property
    def primitive(self):
        if self.status == "indeterminate":
            raise ValueError(
                "peripheral spectrum is borderline "
                f"(moduli {self.moduli[:3]}); primitivity undecided"
            )
        return self.status == "primitive"


def classical_wielandt_bound(dim):
    """The optimal primitivity-index bound D^2 - 2D + 2."""
    return dim * dim - 2 * dim + 2


def wielandt_pattern(dim):
    """Extremal digraph: the D-cycle plus one chord (D-1 -> 1)."""
    if dim < 2:
        raise ValueError("need dimension at least 2")
    pat = np.zeros((dim, dim), dtype=bool)
    for j in range(dim):
        pat[(j + 1) % dim, j] = True
    pat[1, dim - 1] = True
    return pat


def wielandt_matrix(dim):
    """Column-stochastic matrix supported on the extremal digraph."""
    return StochasticMatrix.from_pattern(wielandt_pattern(dim))


def _bool_matmul(a, b):
    return np.einsum("ik,kj->ij", a.astype(np.uint8), b.astype(np.uint8)) > 0


def classical_primitivity_index(m, n_max=None):
    """Smallest n with (pattern^n) entrywise positive, by boolean powers.

    Accepts a :class:`StochasticMatrix` or a 0/1 pattern.  Returns an
    :class:`IndexReport`; the certificate lists the count of positive
    entries after each power.
    """
    if isinstance(m, StochasticMatrix):
        pat = m.pattern
    else:
        pat = np.asarray(m) != 0
    if pat.ndim != 2 or pat.shape[0] != pat.shape[1]:
        raise ValueError(f"expected a square pattern, got shape {pat.shape}")
    dim = pat.shape[0]
    if n_max is None:
        n_max = classical_wielandt_bound(dim)
    positives = []
    cur = pat
    for n in range(1, int(n_max) + 1):
        positives.append(int(cur.sum()))
        if cur.all():
            return IndexReport(n, n, "found", {"positive_entries": positives})
        cur = _bool_matmul(cur, pat)
    return IndexReport(None, int(n_max), "not-found", {"positive_entries": positives})


def pattern_scan(dim, n_max=None):
    """Boolean-power index for every 0/1 pattern on ``dim`` states at once.

    Pattern id ``x`` encodes entry (k // dim, k % dim) in bit ``k``.
    Returns an integer array of length ``2**(dim*dim)``: the index where one
    exists within ``n_max`` (default: the Wielandt bound), else 0.
    """
    if n_max is None:
        n_max = classical_wielandt_bound(dim)
    n_bits = dim * dim
    ids = np.arange(1 << n_bits, dtype=np.int64)
    bits = (ids[:, None] >> np.arange(n_bits)[None, :]) & 1
    pats = bits.reshape(-1, dim, dim).astype(np.uint8)
    cur = pats.copy()
    index = np.zeros(ids.shape[0], dtype=np.int64)
    for n in range(1, int(n_max) + 1):
        full = cur.reshape(cur.shape[0], -1).all(axis=1)
        index[full & (index == 0)] = n
        if n < n_max:
            cur = (np.einsum("bik,bkj->bij", cur, pats) > 0).astype(np.uint8)
    return index


def embed_stochastic(m):
    """Dephasing channel whose action on diagonals is the stochastic matrix.

    One Kraus operator ``sqrt(a_ij) |i><j|`` per nonzero entry, ordered
    row-major for determinism.  Diagonal density matrices map to diagonal
    ones with the stochastic action on the diagonal.
    """
    a = m.entries
    dim = m.dim
    kraus = []
    for i in range(dim):
        for j in range(dim):
            if a[i, j] > 0:
                op = np.zeros((dim, dim), dtype=complex)
                op[i, j] = math.sqrt(a[i, j])
                kraus.append(op)
    return QuantumChannel(np.array(kraus))


def is_primitive(t):
    """Spectral primitivity test: unique peripheral eigenvalue whose fixed
    point has full rank.

    Returns a :class:`SpectralCertificate`; a peripheral spectrum that is
    split by less than the tolerance but not exactly degenerate yields
    status ``"indeterminate"`` rather than a silent boolean.
    """
    tm = t.matrix()
    eigvals, eigvecs = np.linalg.eig(tm)
    order = np.argsort(-np.abs(eigvals))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    moduli = np.abs(eigvals)
    top = moduli[0]
    peripheral = moduli >= top - PERIPHERAL_ATOL
    count = int(np.count_nonzero(peripheral))
    gap = float(top - moduli[count]) if count < moduli.size else 0.0
    fixed_rank = None
    if count > 1:
        spread = float(top - moduli[peripheral].min())
        status = "not-primitive" if spread <= PERIPHERAL_EXACT else "indeterminate"
    else:
        fp = hermitize(eigvecs[:, 0].reshape(t.dim, t.dim))
        if abs(np.trace(fp)) > 0 and np.trace(fp).real < 0:
            fp = -fp
        w = np.abs(np.linalg.eigvalsh(fp))[::-1]
        fixed_rank = numerical_rank(w, t.dim)
        status = "primitive" if fixed_rank == t.dim else "not-primitive"
    return SpectralCertificate(
        status=status,
        moduli=tuple(float(x) for x in moduli[: min(moduli.size, 6)]),
        peripheral_count=count,
        modulus_gap=gap,
        fixed_point_rank=fixed_rank,
        dim=t.dim,
    )


def _word_span_step(mats, basis):
    """Extend an orthonormal basis of the length-n word span to length n+1.

    ``basis`` is ``None`` (start at n=1) or a (r, D, D) stack.  Returns the
    new ``(basis, rank)``.
    """
    dim = mats.shape[1]
    if basis is None:
        cand = mats.reshape(-1, dim * dim)
    else:
        cand = np.einsum("iab,rbc->irac", mats, basis).reshape(-1, dim * dim)
    _, s, vh = np.linalg.svd(cand, full_matrices=False)
    rank = numerical_rank(s, max(cand.shape))
    return vh[:rank].reshape(rank, dim, dim), rank


def _complement_basis(basis):
    """Trace-pairing complement of a word span.

    A zero pair (u, v) exists exactly when the rank-one matrix R = v u^dag
    has tr(w R) = 0 for every w in the span.  tr(wR) = vec(w^T).vec(R) with
    no conjugation, so the complement is the right null space of the stacked
    transposed basis matrices.
    """
    dim = basis.shape[1]
    rows = basis.transpose(0, 2, 1).reshape(-1, dim * dim)
    _, s, vh = np.linalg.svd(rows, full_matrices=True)
    rank = numerical_rank(s, max(rows.shape))
    return vh[rank:].conj().reshape(-1, dim, dim)


def word_matrix(mats, n, max_rows=2 ** 20):
    """Explicit ``d^n x D^2`` matrix of vectorized length-``n`` words."""
    mats = np.asarray(mats, dtype=complex)
    d, dim = mats.shape[0], mats.shape[1]
    if d ** n > max_rows:
        raise SizeLimitError(f"{d ** n} words exceed the cap {max_rows}")
    words = mats
    for _ in range(int(n) - 1):
        words = np.einsum("wab,ibc->wiac", words, mats).reshape(-1, dim, dim)
    return words.reshape(-1, dim * dim)


def injectivity_index_mps(site, n_max=None):
    """Smallest n at which length-n words span all D x D matrices.

    ``site`` is an MPS site tensor (or a ``(d, D, D)`` stack).  The span is
    tracked through an orthonormal basis, so large n costs no more than
    small n.  The search stops early when the span stabilizes below full
    rank (then no larger n can help) and is capped by default at
    ``ceil(2 D^2 (6 + log2 D))``, past which a normal tensor would already
    have become injective; ``status "not-found"`` therefore certifies a
    non-normal tensor.
    """
    if isinstance(site, Tensor):
        mats = site_matrices(site)
    else:
        mats = np.asarray(site, dtype=complex)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a (d, D, D) stack, got shape {mats.shape}")
    dim = mats.shape[1]
    target = dim * dim
    if n_max is None:
        n_max = math.ceil(2 * dim * dim * (6 + math.log2(dim))) if dim > 1 else 1
    basis = None
    ranks = []
    for n in range(1, int(n_max) + 1):
        prev = basis
        basis, rank = _word_span_step(mats, basis)
        ranks.append(rank)
        if rank == target:
            return IndexReport(n, n, "found", {"ranks": ranks})
        if prev is not None and rank == prev.shape[0]:
            stacked = np.vstack(
                [prev.reshape(-1, target), basis.reshape(-1, target)]
            )
            s = np.linalg.svd(stacked, compute_uv=False)
            if numerical_rank(s, max(stacked.shape)) == rank:
                return IndexReport(
                    None, n, "not-found", {"ranks": ranks, "span_stabilized_at": n}
                )
    return IndexReport(None, int(n_max), "not-found", {"ranks": ranks})


def _pair_sweep(kraus, n, v):
    """One alternating minimization sweep; returns (values, new v)."""
    rho = np.einsum("ra,rb->rab", v, v.conj())
    for _ in range(n):
        rho = np.einsum("iab,rbc,idc->rad", kraus, rho, kraus.conj())
    rho = 0.5 * (rho + rho.conj().transpose(0, 2, 1))
    _, vec = np.linalg.eigh(rho)
    u = vec[:, :, 0]
    sig = np.einsum("ra,rb->rab", u, u.conj())
    for _ in range(n):
        sig = np.einsum("iba,rbc,icd->rad", kraus.conj(), sig, kraus)
    sig = 0.5 * (sig + sig.conj().transpose(0, 2, 1))
    w, vec2 = np.linalg.eigh(sig)
    return np.maximum(w[:, 0], 0.0), vec2[:, :, 0]


def _min_pair_value(kraus, n, seed, restarts=OPTIMIZER_RESTARTS):
    """Minimize sum_w |u^dag w v|^2 over unit pairs, w the length-n words.

    Alternating eigenvector iteration run for ``restarts`` random starts in
    lockstep.  A value of 0 means a zero pair exists; a minimum above
    :data:`CERTIFIED_MIN` certifies that none does.  Minima landing in
    between get a longer polish on the best restart before being reported.
    """
    rng = rng_stream(seed, n)
    dim = kraus.shape[1]
    v = rng.standard_normal((restarts, dim)) + 1j * rng.standard_normal((restarts, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    vals = prev = None
    for _ in range(OPTIMIZER_MAX_SWEEPS):
        vals, v = _pair_sweep(kraus, n, v)
        best = float(vals.min())
        if best < 0.1 * ZERO_PAIR_TOL:
            return best
        if prev is not None and float(np.max(np.abs(vals - prev))) <= 1e-13 + 1e-10 * best:
            break
        prev = vals
    best = float(vals.min())
    if best < CERTIFIED_MIN:
        k = int(np.argmin(vals))
        vb = v[k : k + 1]
        for _ in range(10 * OPTIMIZER_MAX_SWEEPS):
            pv, vb = _pair_sweep(kraus, n, vb)
            best = min(best, float(pv[0]))
            if best < 0.1 * ZERO_PAIR_TOL:
                break
    return best


def _length_n_verdict(t, n, basis, rank, tmat_n, seed):
    """Decide whether length n admits a zero pair, with the cheapest
    certain test that applies.

    Ladder: full span passes outright; a complement of dimension at least
    D^2-2D+2 always meets the rank-one (Segre) variety, so a zero pair
    exists; a one-dimensional complement is decided by the rank of its
    single matrix; exact basis pairs are read off the n-th channel-matrix
    power; only then does the restarted optimizer run.
    """
    dim = t.dim
    m = dim * dim - rank
    if m == 0:
        return "span-full", None
    if m >= dim * dim - 2 * dim + 2:
        return "zero-pair-dimension", None
    if m == 1:
        comp = _complement_basis(basis)
        s = np.linalg.svd(comp[0], compute_uv=False)
        if numerical_rank(s, dim) == 1:
            return "zero-pair-rank-one-complement", None
        return "zero-free-complement", float(s[1] / s[0])
    # Entry [(i,i),(j,j)] of the n-th power of the channel matrix is
    # sum_w |w_ij|^2, an exact witness for basis zero pairs.
    diag = tmat_n.reshape(dim, dim, dim, dim)[
        np.arange(dim)[:, None], np.arange(dim)[:, None], np.arange(dim)[None, :], np.arange(dim)[None, :]
    ]
    if float(np.abs(diag).min()) <= ZERO_PAIR_TOL:
        return "zero-pair-basis", float(np.abs(diag).min())
    val = _min_pair_value(t.kraus, n, seed)
    if val < ZERO_PAIR_TOL:
        return "zero-pair-optimizer", val
    if val > CERTIFIED_MIN:
        return "zero-free-optimizer", val
    return "inconclusive", val


def primitivity_index(t, n_max=None, seed=0):
    """Smallest n such that T^n maps every state to a full-rank one.

    Equivalently: no pair (u, v) of nonzero vectors has ``u^dag w v = 0``
    for every length-n Kraus word w.  Each length is decided by the ladder
    of :func:`_length_n_verdict`; the certificate records the verdict and
    witness value per length.
    """
    cert = is_primitive(t)
    if cert.status != "primitive":
        status = "indeterminate" if cert.status == "indeterminate" else "not-found"
        return IndexReport(None, 0, status, {"spectral": cert})
    dim = t.dim
    if n_max is None:
        n_max = max(1, 2 * (dim - 1) ** 2)
    per_n = []
    basis = None
    tmat = t.matrix()
    tmat_n = np.eye(dim * dim, dtype=complex)
    for n in range(1, int(n_max) + 1):
        basis, rank = _word_span_step(t.kraus, basis)
        tmat_n = tmat_n @ tmat
        verdict, value = _length_n_verdict(t, n, basis, rank, tmat_n, seed)
        per_n.append({"n": n, "rank": rank, "verdict": verdict, "value": value})
        if verdict in ("span-full", "zero-free-complement", "zero-free-optimizer"):
            return IndexReport(n, n, "found", {"per_n": per_n, "spectral": cert})
        if verdict == "inconclusive":
            return IndexReport(
                None, n, "indeterminate",
                {"per_n": per_n, "spectral": cert, "min_value": value},
            )
    return IndexReport(None, int(n_max), "not-found", {"per_n": per_n, "spectral": cert})


@dataclass(frozen=True)
class NormalizedTransfer:
    """Transfer channel of a site tensor plus the normalizing data.

    ``channel`` has Kraus operators ``Y A_i Y^-1 / sqrt(scale)`` where
    ``scale`` is the spectral radius of the raw transfer operator and ``Y``
    the Hermitian square root of the fixed point of its adjoint.
    """

    channel: QuantumChannel
    similarity: np.ndarray
    scale: float


def transfer_channel(site):
    """Trace-preserving transfer channel of an MPS site tensor.

    An already trace-preserving (isometric) tensor is returned unchanged
    with identity similarity and scale 1.  Raises
    :class:`NotNormalizableError` when the adjoint fixed point is singular
    or the leading eigenvalue is not positive real.
    """
    if isinstance(site, Tensor):
        mats = site_matrices(site)
    else:
        mats = np.asarray(site, dtype=complex)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a (d, D, D) stack, got shape {mats.shape}")
    dim = mats.shape[1]
    gram = np.einsum("iba,ibc->ac", mats.conj(), mats)
    if np.linalg.norm(gram - np.eye(dim)) <= TRACE_PRESERVING_ATOL:
        return NormalizedTransfer(QuantumChannel(mats), np.eye(dim), 1.0)
    adj = sum(np.kron(a.conj().T, a.T) for a in mats)
    eigvals, eigvecs = np.linalg.eig(adj)
    k = int(np.argmax(np.abs(eigvals)))
    lam = eigvals[k]
    radius = float(np.abs(lam))
    if radius == 0:
        raise NotNormalizableError("transfer operator is nilpotent")
    if abs(lam.imag) > 1e-9 * radius or lam.real <= 0:
        raise NotNormalizableError(
            f"leading transfer eigenvalue {lam:.6g} is not positive real"
        )
    fp = hermitize(eigvecs[:, k].reshape(dim, dim))
    if np.trace(fp).real < 0:
        fp = -fp
    w, vecs = np.linalg.eigh(fp)
    if w.min() <= dim * max(w.max(), 0.0) * RANK_EPS:
        raise NotNormalizableError("fixed point of the adjoint map is singular")
    y = (vecs * np.sqrt(w)) @ vecs.conj().T
    yinv = (vecs / np.sqrt(w)) @ vecs.conj().T
    new = np.einsum("ab,ibc,cd->iad", y, mats, yinv) / math.sqrt(lam.real)
    try:
        channel = QuantumChannel(new)
    except ValueError as exc:
        raise NotNormalizableError(f"normalization failed: {exc}") from None
    return NormalizedTransfer(channel, y, lam.real)


def zero_error_certificate(t, index=None, n_random=1000, seed=0):
    """Check that T^p sends every pure input to a full-rank state.

    ``index`` defaults to the computed primitivity index.  The inputs form
    a deterministic grid (basis states and four-phase pairwise
    superpositions) plus ``n_random`` seeded random pure states.  A True
    return certifies that p rounds close the zero-error channel completely;
    False flags an internal inconsistency with the index computation.
    """
    if index is None:
        report = primitivity_index(t, seed=seed)
        if report.index is None:
            raise ValueError(f"channel has no primitivity index ({report.status})")
        index = report.index
    dim = t.dim
    inputs = [np.eye(dim)[i] for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1.0, -1.0, 1j, -1j):
                v = np.zeros(dim, dtype=complex)
                v[i] = 1.0
                v[j] = phase
                inputs.append(v / np.linalg.norm(v))
    rng = rng_stream(seed, 2027)
    for _ in range(int(n_random)):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        inputs.append(v / np.linalg.norm(v))
    for v in inputs:
        rho = np.outer(v, v.conj())
        out = t.apply_n(rho, index)
        w = np.abs(np.linalg.eigvalsh(hermitize(out)))[::-1]
        if numerical_rank(w, dim) < dim:
            return False
    return True

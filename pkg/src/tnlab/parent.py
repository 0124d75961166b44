"""Parent Hamiltonians: region maps, projector terms, sparse assembly on
rings and small tori, and exact low-energy spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constants import (
    DEGENERACY_ATOL,
    DENSE_EIG_MAX,
    GAMMA_ENTRIES_MAX,
    PROJECTOR_ATOL,
    SPARSE_DIM_MAX,
    SizeLimitError,
    numerical_rank,
)
from .linalg import rng_stream
from .mps import site_matrices
from .tensor import Tensor


@dataclass(frozen=True)
class RegionMap:
    """Dense matrix of the map from virtual boundary states to physical
    region states.

    ``region`` is ("segment", n) or ("square", n); ``gamma`` has shape
    d^{sites} x D^{boundary legs}; column c is the region contraction with
    boundary basis state c.
    """

    region: tuple
    gamma: np.ndarray
    phys_dim: int
    bond_dim: int
    source: str | None = None

    @property
    def n_sites(self):
        kind, n = self.region
        return n if kind == "segment" else n * n

    @property
    def rank(self):
        s = np.linalg.svd(self.gamma, compute_uv=False)
        return numerical_rank(s, max(self.gamma.shape))


class LocalHamiltonian:
    """A Hermitian projector term plus the lattice it translates over.

    ``geometry`` is "ring" (1D, term on consecutive sites) or "torus"
    (2D, term on an n x n square).
    """

    def __init__(self, term, region, phys_dim, geometry="ring", atol=PROJECTOR_ATOL):
        term = np.asarray(term, dtype=complex)
        kind, n = region
        sites = n if kind == "segment" else n * n
        dim = phys_dim ** sites
        if term.shape != (dim, dim):
            raise ValueError(f"term shape {term.shape} does not match d^sites = {dim}")
        if np.linalg.norm(term - term.conj().T) > atol:
            raise ValueError("term is not Hermitian")
        if np.linalg.norm(term @ term - term) > atol:
            raise ValueError("term is not a projector")
        if geometry not in ("ring", "torus"):
            raise ValueError(f"unknown geometry {geometry!r}")
        if (kind, geometry) not in (("segment", "ring"), ("square", "torus")):
            raise ValueError(f"region {region} does not fit geometry {geometry!r}")
        term.flags.writeable = False
        self.term = term
        self.region = region
        self.phys_dim = phys_dim
        self.geometry = geometry

    @property
    def region_sites(self):
        kind, n = self.region
        return n if kind == "segment" else n * n

    def __repr__(self):
        return f"LocalHamiltonian(region={self.region}, d={self.phys_dim}, geometry={self.geometry!r})"


@dataclass(frozen=True)
class SpectrumReport:
    """Lowest part of a spectrum with its degeneracy bookkeeping."""

    eigenvalues: tuple
    ground_degeneracy: int
    gap: float
    L: int | None = None
    solver_residual: float = 0.0
    method: str = "dense"
    status: str = "ok"

    @property
    def ground_energy(self):
        return self.eigenvalues[0] if self.eigenvalues else float("nan")


def gamma_map(a, region):
    """Region map of an MPS site tensor (segment) or PEPS tensor (square).

    For a 1D segment of length n this is the fused word map: row (i1..in),
    column (l, r) holds (A^{i1} ... A^{in})_{l,r} with the boundary pair
    fused row-major.
    """
    if isinstance(region, int):
        region = ("segment", region)
    kind, n = region
    if n < 1:
        raise ValueError("region size must be at least 1")
    if kind == "square" or (isinstance(a, Tensor) and a.rank == 5):
        from .peps import peps_gamma

        return peps_gamma(a, n)
    mats = site_matrices(a) if isinstance(a, Tensor) else np.asarray(a, dtype=complex)
    d, bond = mats.shape[0], mats.shape[1]
    if d ** n * bond ** 2 > GAMMA_ENTRIES_MAX:
        raise SizeLimitError(f"segment map with {d ** n * bond ** 2} entries exceeds the cap")
    words = mats
    for _ in range(n - 1):
        words = np.einsum("wab,ibc->wiac", words, mats).reshape(-1, bond, bond)
    return RegionMap(("segment", n), words.reshape(-1, bond * bond), d, bond)


def parent_term(a, region=None):
    """Projector onto the orthogonal complement of the region image.

    h = 1 - Pi_{Im Gamma}; its kernel is exactly the space of region
    states reachable from some boundary condition, so the tensor-network
    state has zero energy against every translate.  Accepts a tensor plus
    region, or a ready-made :class:`RegionMap`.
    """
    rm = a if isinstance(a, RegionMap) else gamma_map(a, region)
    u, s, _ = np.linalg.svd(rm.gamma, full_matrices=False)
    rank = numerical_rank(s, max(rm.gamma.shape))
    basis = u[:, :rank]
    dim = rm.gamma.shape[0]
    term = np.eye(dim, dtype=complex) - basis @ basis.conj().T
    geometry = "ring" if rm.region[0] == "segment" else "torus"
    return LocalHamiltonian(term, rm.region, rm.phys_dim, geometry)


def _digit_offsets(code_count, local_dims_sites, d, total_sites):
    """Global index offsets of local digit codes placed at given sites."""
    offsets = np.zeros(code_count, dtype=np.int64)
    k = len(local_dims_sites)
    for j, site in enumerate(local_dims_sites):
        digits = (np.arange(code_count) // d ** (k - 1 - j)) % d
        offsets += digits * d ** (total_sites - 1 - site)
    return offsets


def _embed_term(term, sites, d, total_sites):
    """Sparse embedding of a local term at explicit site positions."""
    dim = d ** total_sites
    k = len(sites)
    rows, cols = np.nonzero(term)
    vals = term[rows, cols]
    region_row = _digit_offsets(d ** k, sites, d, total_sites)[rows]
    region_col = _digit_offsets(d ** k, sites, d, total_sites)[cols]
    other = [s for s in range(total_sites) if s not in sites]
    rest = _digit_offsets(d ** len(other), other, d, total_sites)
    coo_rows = (region_row[:, None] + rest[None, :]).ravel()
    coo_cols = (region_col[:, None] + rest[None, :]).ravel()
    coo_vals = np.broadcast_to(vals[:, None], (vals.size, rest.size)).ravel()
    return sp.coo_matrix((coo_vals, (coo_rows, coo_cols)), shape=(dim, dim)).tocsr()


def translated_sites(h, L):
    """Site tuples of every translate of the term on the given lattice."""
    kind, n = h.region
    if kind == "segment":
        return [tuple((t + j) % L for j in range(n)) for t in range(L)]
    out = []
    for tr in range(L):
        for tc in range(L):
            out.append(
                tuple(((tr + r) % L) * L + ((tc + c) % L) for r in range(n) for c in range(n))
            )
    return out


def assemble(h, L):
    """Sparse sum of all translates of the term on a ring or L x L torus."""
    total_sites = L if h.geometry == "ring" else L * L
    kind, n = h.region
    if h.geometry == "ring" and n > L:
        raise ValueError(f"region of {n} sites does not fit on a ring of {L}")
    if h.geometry == "torus" and n > L:
        raise ValueError(f"{n}x{n} region does not fit on a {L}x{L} torus")
    dim = h.phys_dim ** total_sites
    if dim > SPARSE_DIM_MAX:
        raise SizeLimitError(f"dimension {dim} exceeds the sparse cap {SPARSE_DIM_MAX}")
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for sites in translated_sites(h, L):
        out = out + _embed_term(h.term, sites, h.phys_dim, total_sites)
    return out


def apply_term(term, sites, d, total_sites, psi):
    """Matrix-free action of a local term on a dense state."""
    k = len(sites)
    work = np.asarray(psi, dtype=complex).reshape((d,) * total_sites)
    work = np.moveaxis(work, sites, range(k))
    shape = work.shape
    work = term @ work.reshape(d ** k, -1)
    return np.moveaxis(work.reshape(shape), range(k), sites).reshape(-1)


def low_spectrum(ham, k=6, seed=0):
    """Lowest eigenvalues with a degeneracy count at the shared tolerance.

    Dense below :data:`DENSE_EIG_MAX`, else a restarted Krylov solver with a
    seeded start vector; the requested count grows until the spectrum seen
    resolves the ground degeneracy.
    """
    dim = ham.shape[0]
    if k < 2:
        raise ValueError("need at least two eigenvalues")
    if dim <= DENSE_EIG_MAX:
        dense = ham.toarray() if sp.issparse(ham) else np.asarray(ham)
        evals = np.linalg.eigvalsh(dense)
        kk = min(k, dim)
        return _spectrum_report(evals, kk, 0.0, "dense")
    kk = min(max(k, 6), dim - 1)
    rng = rng_stream(seed, 17)
    v0 = rng.standard_normal(dim)
    while True:
        evals, evecs = spla.eigsh(ham, k=kk, which="SA", v0=v0, maxiter=10000)
        order = np.argsort(evals)
        evals = evals[order]
        evecs = evecs[:, order]
        resolved = evals[-1] > evals[0] + DEGENERACY_ATOL
        if resolved or kk >= min(4 * k, dim - 1):
            break
        kk = min(2 * kk, dim - 1)
    residual = max(
        float(np.linalg.norm(ham @ evecs[:, j] - evals[j] * evecs[:, j]))
        for j in range(len(evals))
    )
    return _spectrum_report(evals, min(k, len(evals)), residual, "iterative")


def _spectrum_report(evals, k, residual, method):
    e0 = float(evals[0])
    deg = int(np.count_nonzero(evals <= e0 + DEGENERACY_ATOL))
    above = evals[evals > e0 + DEGENERACY_ATOL]
    gap = float(above[0] - e0) if above.size else 0.0
    return SpectrumReport(
        eigenvalues=tuple(float(x) for x in evals[:k]),
        ground_degeneracy=deg,
        gap=gap,
        solver_residual=float(residual),
        method=method,
    )


def ground_space(ham, k=8, seed=0):
    """Orthonormal basis of the eigenspace within tolerance of the bottom.

    Returns ``(eigenvalues, vectors)`` with one column per ground vector.
    """
    dim = ham.shape[0]
    if dim <= DENSE_EIG_MAX:
        dense = ham.toarray() if sp.issparse(ham) else np.asarray(ham)
        evals, evecs = np.linalg.eigh(dense)
    else:
        kk = min(max(k, 6), dim - 1)
        rng = rng_stream(seed, 19)
        v0 = rng.standard_normal(dim)
        while True:
            evals, evecs = spla.eigsh(ham, k=kk, which="SA", v0=v0, maxiter=10000)
            order = np.argsort(evals)
            evals, evecs = evals[order], evecs[:, order]
            if evals[-1] > evals[0] + DEGENERACY_ATOL or kk >= dim - 1:
                break
            kk = min(2 * kk, dim - 1)
    keep = evals <= evals[0] + DEGENERACY_ATOL
    return evals[keep], evecs[:, keep]


@dataclass(frozen=True)
class FrustrationReport:
    energy: float
    max_term_energy: float
    term_energies: tuple = field(repr=False, default=())


def frustration_check(h, L, state):
    """Energy of a state against the assembled Hamiltonian, term by term.

    Returns the total Rayleigh quotient and the largest single-term
    expectation; a frustration-free ground state gives both near zero.
    """
    psi = np.asarray(state, dtype=complex).reshape(-1)
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 == 0.0:
        raise ValueError("zero state")
    total_sites = L if h.geometry == "ring" else L * L
    if psi.size != h.phys_dim ** total_sites:
        raise ValueError(f"state has {psi.size} entries, lattice wants {h.phys_dim ** total_sites}")
    energies = []
    for sites in translated_sites(h, L):
        hv = apply_term(h.term, sites, h.phys_dim, total_sites, psi)
        energies.append(float(np.vdot(psi, hv).real) / norm2)
    return FrustrationReport(
        energy=float(sum(energies)),
        max_term_energy=float(max(energies)),
        term_energies=tuple(energies),
    )


def gap_series(a, region, sizes, k=6, seed=0):
    """One spectrum report per lattice size; failures become error rows."""
    h = parent_term(a, region)
    reports = []
    for L in sizes:
        try:
            spec = low_spectrum(assemble(h, L), k=k, seed=seed)
            reports.append(
                SpectrumReport(
                    eigenvalues=spec.eigenvalues,
                    ground_degeneracy=spec.ground_degeneracy,
                    gap=spec.gap,
                    L=L,
                    solver_residual=spec.solver_residual,
                    method=spec.method,
                )
            )
        except (ValueError, spla.ArpackError) as exc:
            kind = "size-limited" if isinstance(exc, SizeLimitError) else "error"
            reports.append(
                SpectrumReport(
                    eigenvalues=(),
                    ground_degeneracy=0,
                    gap=float("nan"),
                    L=L,
                    solver_residual=float("nan"),
                    method="none",
                    status=f"{kind}: {exc}",
                )
            )
    return reports

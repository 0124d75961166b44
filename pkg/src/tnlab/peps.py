"""PEPS on small tori: dense contraction, region boundary maps, injectivity
scans, reduced boundary states, and Gibbs-decay fits.

Sites sit on an L x L square lattice with periodic edges.  A site tensor
carries labels (phys, up, right, down, left); all four virtual legs share
one bond dimension.  Torus edges are named v{r}_{c} (below site (r, c)) and
h{r}_{c} (to the right of site (r, c)), indices mod L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .channels import IndexReport
from .constants import (
    DENSE_EIG_MAX,
    GAMMA_ENTRIES_MAX,
    PEPS_STATE_MAX,
    PEPS_VIRTUAL_MAX,
    RECONSTRUCTION_ATOL,
    SizeLimitError,
    numerical_rank,
)
from .linalg import hermitian_basis, hermitize, logm_hermitian, operator_norm
from .models import PEPS_LABELS
from .parent import RegionMap
from .tensor import Tensor, contract_network, group_indices, self_contract

# Two-body norms at or below this floor count as absent links and are left
# out of the decay fit.
NORM_FLOOR = 1e-14


def _site_data(a):
    """Canonical (phys, up, right, down, left) array plus (d, D)."""
    if isinstance(a, Tensor):
        if sorted(a.labels) != sorted(PEPS_LABELS):
            raise ValueError(f"PEPS site needs labels {PEPS_LABELS}, got {a.labels}")
        data = a.transpose(PEPS_LABELS).data
    else:
        data = np.asarray(a, dtype=complex)
    if data.ndim != 5:
        raise ValueError(f"PEPS site tensor must have 5 legs, got {data.ndim}")
    virtual = set(data.shape[1:])
    if len(virtual) != 1:
        raise ValueError(f"virtual dimensions must agree, got {data.shape[1:]}")
    return data, data.shape[0], data.shape[1]


def _torus_sites(data, L, order):
    """Site tensors of the closed torus, pool-ordered for cheap folding."""
    if order == "col":
        coords = [(r, c) for c in range(L) for r in range(L)]
    else:
        coords = [(r, c) for r in range(L) for c in range(L)]
    tensors = []
    for r, c in coords:
        labels = (
            f"p{r}_{c}",
            f"v{(r - 1) % L}_{c}",
            f"h{r}_{c}",
            f"v{r}_{c}",
            f"h{r}_{(c - 1) % L}",
        )
        tensors.append(Tensor(data, labels))
    return tensors


def peps_contract(a, L, order="col"):
    """Dense state vector of the PEPS on an L x L torus.

    Physical indices come out row-major in (row, column).  ``order`` picks
    the fold direction ("col" sweeps columns, "row" sweeps rows); both give
    the same vector and exist so one can cross-check the other.
    """
    if order not in ("col", "row"):
        raise ValueError(f"unknown contraction order {order!r}")
    data, d, D = _site_data(a)
    if L < 1:
        raise ValueError("torus side must be at least 1")
    if D ** (2 * L) > PEPS_VIRTUAL_MAX:
        raise SizeLimitError(f"virtual cut D^(2L) = {D ** (2 * L)} exceeds the cap")
    if d ** (L * L) > PEPS_STATE_MAX:
        raise SizeLimitError(f"dense state with {d ** (L * L)} entries exceeds the cap")
    if L == 1:
        t = self_contract(Tensor(data, PEPS_LABELS), [("down", "up"), ("right", "left")])
        return t.data.copy()
    acc = contract_network(_torus_sites(data, L, order))
    phys = [f"p{r}_{c}" for r in range(L) for c in range(L)]
    return group_indices(acc, [phys], names=["phys"]).data


def boundary_edges(n, L=None):
    """Region boundary edges counterclockwise from the top-left corner.

    The region is the n x n square anchored at site (0, 0); ``L`` is the
    surrounding torus side (defaults to a lattice just large enough that no
    edge wraps onto another region site).  Order: left side top to bottom,
    bottom left to right, right side bottom to top, top right to left.
    """
    if L is None:
        L = n + 1
    if L < n + 1:
        raise ValueError("torus must exceed the region side by at least one")
    edges = [f"h{k}_{L - 1}" for k in range(n)]
    edges += [f"v{n - 1}_{k}" for k in range(n)]
    edges += [f"h{n - 1 - k}_{n - 1}" for k in range(n)]
    edges += [f"v{L - 1}_{n - 1 - k}" for k in range(n)]
    return edges


def _region_sites(data, n, L):
    """Site tensors of the n x n region with torus edge names (side L)."""
    tensors = []
    for r in range(n):
        for c in range(n):
            labels = (
                f"p{r}_{c}",
                f"v{(r - 1) % L}_{c}",
                f"h{r}_{c}",
                f"v{r}_{c}",
                f"h{r}_{(c - 1) % L}",
            )
            tensors.append(Tensor(data, labels))
    return tensors


def peps_gamma(a, n):
    """Boundary-to-bulk map of an n x n region.

    Rows are the region's physical indices (row-major over sites); columns
    are virtual boundary states, boundary legs ordered counterclockwise
    from the top-left corner.
    """
    data, d, D = _site_data(a)
    if n < 1:
        raise ValueError("region side must be at least 1")
    entries = d ** (n * n) * D ** (4 * n)
    if entries > GAMMA_ENTRIES_MAX:
        raise SizeLimitError(f"region map with {entries} entries exceeds the cap")
    acc = contract_network(_region_sites(data, n, L=n + 1))
    phys = [f"p{r}_{c}" for r in range(n) for c in range(n)]
    t = group_indices(acc, [phys, boundary_edges(n)], names=["phys", "boundary"])
    return RegionMap(("square", n), t.data, d, D, source="peps")


def peps_injectivity_index(a, n_max=None):
    """Smallest n for which the n x n region map has full column rank.

    Scans n = 1, 2, ... while the region map fits the size cap (or up to
    ``n_max``).  Status "size-limited" means the scan stopped at the cap
    without a verdict.
    """
    data, d, D = _site_data(a)
    ranks = []
    n = 0
    while True:
        n += 1
        if n_max is not None and n > n_max:
            return IndexReport(None, n - 1, "not-found", {"ranks": tuple(ranks)})
        if d ** (n * n) * D ** (4 * n) > GAMMA_ENTRIES_MAX:
            return IndexReport(None, n - 1, "size-limited", {"ranks": tuple(ranks)})
        rm = peps_gamma(a, n)
        rank = rm.rank
        ranks.append(rank)
        if rank == D ** (4 * n):
            return IndexReport(n, n, "found", {"ranks": tuple(ranks)})


@dataclass(frozen=True)
class BoundaryState:
    """Reduced state on the virtual boundary legs of a region.

    ``rho`` is Hermitian, trace one, of dimension site_dim**n_sites; sites
    run counterclockwise around the region so the pair distance in
    :func:`gibbs_fit` is arc length along the boundary loop.
    """

    rho: np.ndarray
    n_sites: int
    site_dim: int
    region: tuple | None = None
    torus: int | None = None
    min_eigenvalue: float | None = None

    def __post_init__(self):
        dim = self.site_dim ** self.n_sites
        if self.rho.shape != (dim, dim):
            raise ValueError(f"state shape {self.rho.shape} is not ({dim}, {dim})")
        defect = np.linalg.norm(self.rho - self.rho.conj().T)
        if defect > RECONSTRUCTION_ATOL * max(1.0, np.linalg.norm(self.rho)):
            raise ValueError(f"state is not Hermitian (defect {defect:.2e})")
        if abs(np.trace(self.rho).real - 1.0) > RECONSTRUCTION_ATOL:
            raise ValueError("state is not trace-normalized")

    @classmethod
    def from_density(cls, rho, site_dim, n_sites=None, region=None, torus=None):
        """Hermitize, trace-normalize, and wrap a raw density matrix."""
        rho = np.asarray(rho, dtype=complex)
        if n_sites is None:
            n_sites = round(np.log(rho.shape[0]) / np.log(site_dim))
        rho = hermitize(rho)
        tr = float(np.trace(rho).real)
        if tr <= 0.0:
            raise ValueError(f"density matrix has nonpositive trace {tr:.2e}")
        rho = rho / tr
        if rho.shape[0] <= DENSE_EIG_MAX:
            min_eig = float(np.linalg.eigvalsh(rho)[0])
        else:
            min_eig = float(spla.eigsh(rho, k=1, which="SA")[0][0])
        return cls(rho, int(n_sites), int(site_dim), region, torus, min_eig)


def boundary_state(a, n, L):
    """Boundary state of an n x n region cut from the L x L torus.

    Contracts the ket and bra layers of every exterior site, leaving the
    region's virtual boundary legs open, then hermitizes and normalizes.
    Boundary legs follow :func:`boundary_edges` order.
    """
    data, d, D = _site_data(a)
    if n < 1:
        raise ValueError("region side must be at least 1")
    if L < n + 1:
        raise ValueError("torus must exceed the region side by at least one")
    if (D * D) ** (2 * L + 2) > GAMMA_ENTRIES_MAX or D ** (8 * n) > GAMMA_ENTRIES_MAX:
        raise SizeLimitError("doubled-layer contraction exceeds the size cap")
    dbl = np.tensordot(data, data.conj(), axes=([0], [0]))
    exterior = []
    coords = [(r, c) for c in range(n, L) for r in range(L)]
    coords += [(r, c) for r in range(n, L) for c in reversed(range(n))]
    for r, c in coords:
        edges = (
            f"v{(r - 1) % L}_{c}",
            f"h{r}_{c}",
            f"v{r}_{c}",
            f"h{r}_{(c - 1) % L}",
        )
        labels = tuple(f"k:{e}" for e in edges) + tuple(f"b:{e}" for e in edges)
        exterior.append(Tensor(dbl, labels))
    acc = contract_network(exterior)
    loop = boundary_edges(n, L)
    kets = [f"k:{e}" for e in loop]
    bras = [f"b:{e}" for e in loop]
    rho = group_indices(acc, [kets, bras], names=["ket", "bra"]).data
    return BoundaryState.from_density(rho, D, n_sites=4 * n, region=("square", n), torus=L)


@dataclass(frozen=True)
class GibbsFit:
    """Local-Hamiltonian decomposition of a boundary state.

    ``hamiltonian`` is -log(rho) on the support of rho; coefficients are
    taken in the orthonormal Hermitian product basis.  ``pairs`` holds
    (i, j, loop distance, interaction norm) for every site pair; the decay
    fit is log ||h_ij|| ~ log J - alpha * distance over pairs above the
    norm floor.
    """

    hamiltonian: np.ndarray
    support_rank: int
    support_deficient: bool
    identity_coefficient: float
    single_norms: tuple
    pairs: tuple
    J: float
    alpha: float
    residual: float

    def two_body_norms(self):
        return {(i, j): norm for i, j, _, norm in self.pairs}


def loop_distance(i, j, m):
    """Arc distance between boundary sites i and j on a loop of m sites."""
    step = abs(int(i) - int(j)) % m
    return min(step, m - step)


def _coefficient_tensor(h, dim, m):
    """Expansion of h over the m-fold Hermitian product basis."""
    basis = hermitian_basis(dim)
    work = h.reshape((dim,) * (2 * m))
    for t in range(m):
        work = np.tensordot(basis.conj(), work, axes=([1, 2], [t, m]))
        work = np.moveaxis(work, 0, t)
    return work.real, basis


def gibbs_fit(b, norm_floor=NORM_FLOOR):
    """Fit the boundary state to exp(-H) with H a sum of decaying
    two-body terms on the boundary loop.

    Needs at least three distinct loop distances (six boundary sites) so
    the exponential fit is not vacuous.  J and alpha come from least
    squares on log ||h_ij|| against loop distance; ``alpha`` is inf when
    every surviving pair sits at one distance (or none survive).
    """
    m, D = b.n_sites, b.site_dim
    if m // 2 < 3:
        raise ValueError(
            f"{m} boundary sites give {m // 2} distinct loop distances; need 3"
        )
    log_rho, support_rank = logm_hermitian(b.rho)
    h = -log_rho
    coeff, basis = _coefficient_tensor(h, D, m)
    # A spectator site carries B_0 = 1/sqrt(D), so stripping the identity
    # factors off a k-site component divides its coefficient by sqrt(D) for
    # each of the other m - k sites.
    root_d = np.sqrt(float(D))
    identity = float(coeff[(0,) * m]) / root_d ** m
    singles = []
    for i in range(m):
        sel = tuple(slice(1, None) if t == i else 0 for t in range(m))
        vec = coeff[sel] / root_d ** (m - 1)
        singles.append(operator_norm(np.tensordot(vec, basis[1:], axes=1)))
    pairs = []
    for i in range(m):
        for j in range(i + 1, m):
            sel = tuple(slice(1, None) if t in (i, j) else 0 for t in range(m))
            block = coeff[sel] / root_d ** (m - 2)
            hij = np.einsum("pq,pab,qcd->acbd", block, basis[1:], basis[1:])
            norm = operator_norm(hij.reshape(D * D, D * D))
            pairs.append((i, j, loop_distance(i, j, m), norm))
    points = [(dist, np.log(norm)) for _, _, dist, norm in pairs if norm > norm_floor]
    if not points:
        J, alpha, residual = 0.0, float("inf"), 0.0
    elif len({dist for dist, _ in points}) == 1:
        logs = np.array([y for _, y in points])
        J, alpha = float(np.exp(logs.mean())), float("inf")
        residual = float(np.sqrt(np.mean((logs - logs.mean()) ** 2)))
    else:
        x = np.array([d for d, _ in points], dtype=float)
        y = np.array([v for _, v in points])
        design = np.stack([np.ones_like(x), -x], axis=1)
        (log_j, alpha), *_ = np.linalg.lstsq(design, y, rcond=None)
        pred = design @ np.array([log_j, alpha])
        J = float(np.exp(log_j))
        alpha = float(alpha)
        residual = float(np.sqrt(np.mean((y - pred) ** 2)))
    return GibbsFit(
        hamiltonian=h,
        support_rank=int(support_rank),
        support_deficient=bool(support_rank < b.rho.shape[0]),
        identity_coefficient=identity,
        single_norms=tuple(float(s) for s in singles),
        pairs=tuple(pairs),
        J=J,
        alpha=alpha,
        residual=residual,
    )

"""Symmetry actions on normal MPS: finite group bookkeeping, symmetry
verification on rings, virtual-representation extraction, and the abelian
cohomology invariant that separates symmetry-protected phases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import GAUGE_ATOL
from .linalg import fix_phase, unitarize
from .mps import Mps, block_sites, site_matrices

# Largest group order for which the multiplication-table axioms are checked
# exhaustively.
GROUP_ORDER_MAX = 16


@dataclass(frozen=True)
class GroupSpec:
    """Finite group given by element labels and a multiplication table.

    ``table[i][j]`` is the index of ``labels[i] * labels[j]``.  Axioms are
    verified exhaustively on construction, which is why the order is capped
    at GROUP_ORDER_MAX.
    """

    labels: tuple
    table: tuple

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", table)
        n = len(labels)
        if n == 0 or n > GROUP_ORDER_MAX:
            raise ValueError(f"group order must be in 1..{GROUP_ORDER_MAX}, got {n}")
        if len(set(labels)) != n:
            raise ValueError("element labels must be distinct")
        if len(table) != n or any(len(row) != n for row in table):
            raise ValueError(f"multiplication table must be {n} x {n}")
        if any(x < 0 or x >= n for row in table for x in row):
            raise ValueError("table entries must index elements")
        identity = None
        for e in range(n):
            if all(table[e][x] == x and table[x][e] == x for x in range(n)):
                identity = e
                break
        if identity is None:
            raise ValueError("no identity element")
        object.__setattr__(self, "_identity", identity)
        for g in range(n):
            if not any(table[g][h] == identity and table[h][g] == identity for h in range(n)):
                raise ValueError(f"element {labels[g]!r} has no inverse")
        for g in range(n):
            for h in range(n):
                for k in range(n):
                    if table[table[g][h]][k] != table[g][table[h][k]]:
                        raise ValueError(
                            f"associativity fails at ({labels[g]}, {labels[h]}, {labels[k]})"
                        )

    @property
    def order(self):
        return len(self.labels)

    @property
    def identity(self):
        return self.labels[self._identity]

    @property
    def is_abelian(self):
        n = self.order
        return all(self.table[g][h] == self.table[h][g] for g in range(n) for h in range(n))

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"no element labeled {label!r}") from None

    def multiply(self, g, h):
        return self.labels[self.table[self.index(g)][self.index(h)]]

    def inverse(self, g):
        gi = self.index(g)
        for h in range(self.order):
            if self.table[gi][h] == self._identity:
                return self.labels[h]
        raise AssertionError("validated group lost an inverse")

    def generated_by(self, generators):
        """Set of labels reachable as words in the given generators."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = [str(g) for g in generators]
        for g in gens:
            self.index(g)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.multiply(x, g)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return seen


def cyclic_group(n):
    """Z_n with labels g0 (identity), g1, ..., g{n-1}."""
    labels = tuple(f"g{k}" for k in range(n))
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    return GroupSpec(labels, table)


def z2z2_group():
    """Z_2 x Z_2 with labels e, a, b, ab."""
    labels = ("e", "a", "b", "ab")
    # bit pairs: e=00, a=10, b=01, ab=11, product = xor
    codes = (0b00, 0b10, 0b01, 0b11)
    back = {c: i for i, c in enumerate(codes)}
    table = tuple(tuple(back[codes[i] ^ codes[j]] for j in range(4)) for i in range(4))
    return GroupSpec(labels, table)


def complete_representation(group, partial, atol=GAUGE_ATOL):
    """Extend generator images to the whole group by multiplying words.

    ``partial`` maps some element labels to matrices and must generate the
    group.  The identity is filled in automatically; an element reached
    along two words whose products disagree beyond ``atol`` raises, since
    the images then violate the group relations.
    """
    partial = {str(g): np.asarray(u, dtype=complex) for g, u in partial.items()}
    if not partial:
        raise ValueError("no generator images given")
    dims = {u.shape for u in partial.values()}
    if len(dims) != 1 or any(s[0] != s[1] or len(s) != 2 for s in dims):
        raise ValueError(f"generator images must share one square shape, got {dims}")
    d = next(iter(dims))[0]
    for g in partial:
        group.index(g)
    rep = {group.identity: np.eye(d, dtype=complex)}
    for g, u in partial.items():
        if g in rep and np.linalg.norm(u - rep[g]) > atol:
            raise ValueError(f"image of the identity {g!r} is not the identity matrix")
        rep.setdefault(g, u)
    grew = True
    while grew:
        grew = False
        for x in list(rep):
            for g in partial:
                y = group.multiply(x, g)
                prod = rep[x] @ partial[g]
                if y in rep:
                    if np.linalg.norm(prod - rep[y]) > atol * np.sqrt(d):
                        raise ValueError(
                            f"generator images are inconsistent at {x!r} * {g!r} = {y!r}"
                        )
                else:
                    rep[y] = prod
                    grew = True
    if len(rep) < group.order:
        missing = sorted(set(group.labels) - set(rep))
        raise ValueError(f"given elements do not generate the group; missing {missing}")
    return rep


@dataclass(frozen=True)
class SymmetryCheck:
    """Per-ring verification that an on-site unitary preserves the state."""

    sizes: tuple
    phases: tuple
    residuals: tuple
    atol: float = GAUGE_ATOL

    @property
    def ok(self):
        return bool(all(r <= self.atol for r in self.residuals))


def _apply_sitewise(u, psi, d, n_sites):
    arr = psi.reshape((d,) * n_sites)
    for t in range(n_sites):
        arr = np.moveaxis(np.tensordot(u, arr, axes=([1], [t])), 0, t)
    return arr.reshape(-1)


def check_symmetry(site, u, sizes, atol=GAUGE_ATOL):
    """Verify u^(x L) fixes the ring state up to a phase for each L.

    The phase is the normalized overlap <psi|u^(x L)|psi>/<psi|psi>; the
    residual is || u^(x L) psi - phase * psi || / ||psi||.
    """
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d):
        raise ValueError(f"on-site operator must be square, got {u.shape}")
    if np.linalg.norm(u @ u.conj().T - np.eye(d)) > atol:
        raise ValueError("on-site operator is not unitary")
    phases, residuals = [], []
    for L in sizes:
        psi = Mps.ring(site, int(L)).to_dense()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError(f"ring state of {L} sites contracts to zero")
        phi = _apply_sitewise(u, psi, d, int(L))
        phase = np.vdot(psi, phi) / norm ** 2
        phases.append(complex(phase))
        residuals.append(float(np.linalg.norm(phi - phase * psi) / norm))
    return SymmetryCheck(tuple(int(L) for L in sizes), tuple(phases), tuple(residuals), atol)


@dataclass(frozen=True)
class VirtualAction:
    """Unitary V and phase c with sum_j u_ij A^j = c V^dag A^i V."""

    v: np.ndarray
    phase: complex
    residual: float


def extract_vg(site, u, atol=GAUGE_ATOL):
    """Virtual representative of an on-site symmetry, or ``None``.

    For a normal site tensor A and unitary u acting on the physical leg,
    solves sum_j u_ij A^j = c V^dag A^i V.  The candidate comes from the
    word-matrix least-squares solve at the injectivity length; the scalar c
    is fitted afterwards (the defining relation only holds up to a phase),
    V is snapped to the nearest unitary, and the relation is re-verified.
    """
    from .channels import injectivity_index_mps, word_matrix

    a = site_matrices(site)
    u = np.asarray(u, dtype=complex)
    if u.shape != (a.shape[0], a.shape[0]):
        raise ValueError(f"on-site operator shape {u.shape} does not match d={a.shape[0]}")
    if a.shape[1] != a.shape[2]:
        raise ValueError("virtual representation needs square virtual dimensions")
    report = injectivity_index_mps(site)
    if report.index is None:
        raise ValueError("site tensor is not normal; block sites before extracting")
    b = np.einsum("ij,jab->iab", u, a)
    dim = a.shape[1]
    wa = word_matrix(a, report.index)
    wb = word_matrix(b, report.index)
    z = np.linalg.pinv(wa) @ wb
    r = z.reshape(dim, dim, dim, dim).transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)
    _, s, vh = np.linalg.svd(r)
    if s[0] == 0:
        return None
    # top right-singular row is vec(V) up to a phase, as in mps.find_gauge
    v = fix_phase(unitarize(vh[0].reshape(dim, dim)))

    def fit(y):
        # y B^i = c A^i y in least squares over the free scalar c
        num = sum(np.vdot(ai @ y, y @ bi) for ai, bi in zip(a, b))
        den = sum(np.linalg.norm(ai @ y) ** 2 for ai in a)
        if den == 0:
            return complex(0), float("inf")
        c = num / den
        err = sum(np.linalg.norm(y @ bi - c * (ai @ y)) ** 2 for ai, bi in zip(a, b))
        return complex(c), float(np.sqrt(err / den))

    phase, residual = fit(v)
    if residual > atol:
        return None
    return VirtualAction(v, phase, residual)


@dataclass(frozen=True)
class SptReport:
    """Cohomology data of an abelian on-site symmetry of a normal MPS.

    ``cocycle[(g, h)]`` is tr(V_gh^dag V_g V_h)/D; ``beta[(g, h)]`` is the
    gauge-invariant ratio cocycle(g, h)/cocycle(h, g).  The state is in the
    trivial phase iff every beta is 1.
    """

    group: GroupSpec
    block_length: int
    virtual: dict
    phases: dict
    cocycle: dict
    beta: dict
    residual: float
    class_label: str

    @property
    def trivial(self):
        return self.class_label == "trivial"


def cocycle_table(group, virtual, atol=GAUGE_ATOL):
    """Phases omega(g, h) with V_g V_h = omega(g, h) V_gh.

    Raises when some product fails to match its representative up to a
    phase, which signals that the inputs were not extracted from one
    symmetric state.
    """
    dim = next(iter(virtual.values())).shape[0]
    omega, worst = {}, 0.0
    for g in group.labels:
        for h in group.labels:
            prod = virtual[g] @ virtual[h]
            target = virtual[group.multiply(g, h)]
            w = np.trace(target.conj().T @ prod) / dim
            defect = abs(abs(w) - 1.0)
            resid = np.linalg.norm(prod - w * target) / np.sqrt(dim)
            worst = max(worst, defect, resid)
            if defect > atol or resid > atol:
                raise ValueError(
                    f"V_{g} V_{h} is not proportional to V_{group.multiply(g, h)} "
                    f"(defect {max(defect, resid):.2e})"
                )
            omega[(g, h)] = complex(w / abs(w))
    return omega, worst


def cohomology_class(group, omega, atol=GAUGE_ATOL):
    """Gauge-invariant class data from a cocycle table.

    Only abelian groups are classified here; the invariant is the table
    beta(g, h) = omega(g, h)/omega(h, g), which is insensitive to the phase
    freedom V_g -> e^{i phi_g} V_g.
    """
    if not group.is_abelian:
        raise ValueError("cohomology classification implemented for abelian groups only")
    beta = {}
    for g in group.labels:
        for h in group.labels:
            beta[(g, h)] = complex(omega[(g, h)] / omega[(h, g)])
    label = "trivial" if all(abs(b - 1.0) <= atol for b in beta.values()) else "nontrivial"
    return beta, label


def spt_classify(site, group, representation, atol=GAUGE_ATOL):
    """Classify a normal MPS under an abelian on-site symmetry.

    ``representation`` maps every group label to a physical unitary; it
    must be a homomorphism.  The site is blocked to its injectivity length,
    virtual representatives are extracted per element, and the beta table
    decides the phase.  Raises ValueError when some element is not a
    symmetry of the state.
    """
    from .channels import injectivity_index_mps

    if not group.is_abelian:
        raise ValueError("cohomology classification implemented for abelian groups only")
    rep = {str(g): np.asarray(representation[g], dtype=complex) for g in group.labels}
    d = site_matrices(site).shape[0]
    for g, ug in rep.items():
        if ug.shape != (d, d):
            raise ValueError(f"representation of {g!r} has shape {ug.shape}, expected ({d}, {d})")
        if np.linalg.norm(ug @ ug.conj().T - np.eye(d)) > atol:
            raise ValueError(f"representation of {g!r} is not unitary")
    for g in group.labels:
        for h in group.labels:
            gh = group.multiply(g, h)
            if np.linalg.norm(rep[g] @ rep[h] - rep[gh]) > atol:
                raise ValueError(
                    f"physical representation is not a homomorphism at ({g}, {h})"
                )
    report = injectivity_index_mps(site)
    if report.index is None:
        raise ValueError("site tensor is not normal; classification needs a finite index")
    n = report.index
    blocked = block_sites(site, n) if n > 1 else site
    virtual, phases = {}, {}
    worst = 0.0
    for g in group.labels:
        ug = rep[g]
        for _ in range(n - 1):
            ug = np.kron(ug, rep[g])
        action = extract_vg(blocked, ug, atol=atol)
        if action is None:
            raise ValueError(f"{g!r} is not a symmetry of the state")
        virtual[g] = action.v
        phases[g] = action.phase
        worst = max(worst, action.residual)
    omega, defect = cocycle_table(group, virtual, atol=atol)
    worst = max(worst, defect)
    beta, label = cohomology_class(group, omega, atol=atol)
    return SptReport(
        group=group,
        block_length=n,
        virtual=virtual,
        phases=phases,
        cocycle=omega,
        beta=beta,
        residual=worst,
        class_label=label,
    )

"""Tests for torus contraction, region maps, boundary states, and the
Gibbs-decay fit.

The 2x2 torus has a hand-written einsum oracle, and the fit is checked on
planted exp(-H) states where every coefficient is known exactly.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from tnlab.constants import SizeLimitError
from tnlab.linalg import hermitian_basis
from tnlab.models import copy_peps_site, injective_peps_site, random_peps_site
from tnlab.peps import (
    BoundaryState,
    boundary_edges,
    boundary_state,
    gibbs_fit,
    loop_distance,
    peps_contract,
    peps_gamma,
    peps_injectivity_index,
)


def torus_2x2_oracle(t):
    """Dense 2x2 torus state by one explicit einsum over all eight edges.

    Letters: v0_0=W, v0_1=X, v1_0=Y, v1_1=Z, h0_0=A, h0_1=B, h1_0=C,
    h1_1=D; each site reads (phys, up, right, down, left).
    """
    d = t.data if hasattr(t, "data") else np.asarray(t)
    return np.einsum(
        "aYAWB,bZBXA,cWCYD,dXDZC->abcd", d, d, d, d
    ).reshape(-1)


def kron_embed(term, sites, d, total):
    k = len(sites)
    full = np.kron(term, np.eye(d ** (total - k)))
    order = list(sites) + [s for s in range(total) if s not in sites]
    perm = np.argsort(order)
    m = full.reshape((d,) * (2 * total))
    m = m.transpose(list(perm) + [total + p for p in perm])
    return m.reshape(d ** total, d ** total)


def test_contract_orders_agree_with_each_other_and_oracle():
    t = random_peps_site(2, 2, seed=0)
    col = peps_contract(t, 2, order="col")
    row = peps_contract(t, 2, order="row")
    want = torus_2x2_oracle(t.transpose(("phys", "up", "right", "down", "left")))
    assert np.allclose(col, row, atol=1e-12)
    assert np.allclose(col, want, atol=1e-12)


def test_contract_copy_tensor_is_ghz():
    for L in (2, 3):
        psi = peps_contract(copy_peps_site(2), L)
        want = np.zeros(2 ** (L * L))
        want[0] = want[-1] = 1.0
        assert np.allclose(psi, want, atol=1e-14)


def test_contract_single_site_traces_opposite_legs():
    t = random_peps_site(3, 2, seed=1)
    psi = peps_contract(t, 1)
    data = t.transpose(("phys", "up", "right", "down", "left")).data
    want = np.einsum("aijij->a", data)
    assert np.allclose(psi, want, atol=1e-12)


def test_contract_respects_caps():
    with pytest.raises(SizeLimitError):
        peps_contract(random_peps_site(2, 3, seed=2), 6)


def test_boundary_edges_frozen_order():
    assert boundary_edges(1) == ["h0_1", "v0_0", "h0_0", "v1_0"]
    assert boundary_edges(2) == [
        "h0_2", "h1_2", "v1_0", "v1_1", "h1_1", "h0_1", "v2_1", "v2_0",
    ]
    edges = boundary_edges(3, L=5)
    assert len(edges) == 12 and len(set(edges)) == 12
    with pytest.raises(ValueError):
        boundary_edges(2, L=2)


def test_gamma_single_site_is_leg_permutation():
    t = random_peps_site(3, 2, seed=3)
    rm = peps_gamma(t, 1)
    assert rm.gamma.shape == (3, 16)
    data = t.transpose(("phys", "up", "right", "down", "left")).data
    # boundary order (left, down, right, up) per boundary_edges(1)
    want = data.transpose(0, 4, 3, 2, 1).reshape(3, 16)
    assert np.allclose(rm.gamma, want, atol=1e-12)


def test_injectivity_index_injective_site():
    report = peps_injectivity_index(injective_peps_site(bond=2, seed=0))
    assert report.status == "found"
    assert report.index == 1
    assert report.certificate["ranks"] == (16,)


def test_injectivity_index_copy_tensor_never_injective():
    report = peps_injectivity_index(copy_peps_site(2), n_max=2)
    assert report.status == "not-found"
    assert report.certificate["ranks"] == (2, 2)
    capped = peps_injectivity_index(copy_peps_site(2))
    assert capped.status == "size-limited"


def test_boundary_state_properties():
    b = boundary_state(injective_peps_site(bond=2, seed=1), 1, 2)
    assert b.n_sites == 4 and b.site_dim == 2
    assert b.region == ("square", 1) and b.torus == 2
    assert abs(np.trace(b.rho) - 1.0) < 1e-12
    assert np.allclose(b.rho, b.rho.conj().T, atol=1e-12)
    assert b.min_eigenvalue is not None and b.min_eigenvalue > -1e-12


def test_boundary_state_matches_exterior_einsum_oracle():
    t = random_peps_site(2, 2, seed=4)
    d = t.transpose(("phys", "up", "right", "down", "left")).data
    # exterior of region (0,0) on the 2x2 torus: sites (0,1), (1,1), (1,0);
    # open legs ordered (h0_1, v0_0, h0_0, v1_0) as boundary_edges(1) says
    x = np.einsum("aZBXA,bXDZC,cWCYD->abcBWAY", d, d, d)
    x = x.reshape(-1, 16)
    rho = x.conj().T @ x
    rho = rho.conj()  # ket layer is the unconjugated factor
    rho = rho / np.trace(rho)
    b = boundary_state(t, 1, 2)
    assert np.allclose(b.rho, rho, atol=1e-10)


def test_boundary_state_consistent_with_region_map():
    # tracing the torus state over the exterior equals conjugating the
    # boundary state by the region map
    t = random_peps_site(2, 2, seed=5)
    psi = peps_contract(t, 2)
    rho_full = np.outer(psi, psi.conj())
    block = rho_full.reshape(2, 8, 2, 8)
    rho_phys = np.trace(block, axis1=1, axis2=3)
    rho_phys = rho_phys / np.trace(rho_phys)
    gamma = peps_gamma(t, 1).gamma
    b = boundary_state(t, 1, 2)
    rec = gamma @ b.rho @ gamma.conj().T
    rec = rec / np.trace(rec)
    assert np.allclose(rho_phys, rec, atol=1e-10)


def test_boundary_state_validation():
    t = injective_peps_site(bond=2, seed=1)
    with pytest.raises(ValueError, match="torus must exceed"):
        boundary_state(t, 1, 1)
    with pytest.raises(SizeLimitError):
        boundary_state(random_peps_site(2, 2, seed=6), 1, 8)


def test_from_density_normalizes_and_validates():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = m @ m.conj().T
    b = BoundaryState.from_density(3.0 * rho, site_dim=2)
    assert b.n_sites == 2
    assert abs(np.trace(b.rho) - 1.0) < 1e-12
    assert b.min_eigenvalue >= -1e-12
    with pytest.raises(ValueError, match="nonpositive trace"):
        BoundaryState.from_density(-rho, site_dim=2)


def test_loop_distance():
    assert [loop_distance(0, j, 6) for j in range(6)] == [0, 1, 2, 3, 2, 1]


def planted_state(blocks, m=6, dim=2):
    """rho = exp(-H)/Z for H = sum of given pair blocks; returns (rho, H)."""
    h = np.zeros((dim ** m, dim ** m), dtype=complex)
    for (i, j), op in blocks.items():
        h += kron_embed(op, [i, j], dim, m)
    rho = expm(-h)
    z = float(np.trace(rho).real)
    return rho / z, h, np.log(z)


def test_gibbs_fit_recovers_planted_nearest_neighbor_model():
    rng = np.random.default_rng(8)
    basis = hermitian_basis(2)
    blocks = {}
    want_norms = {}
    for i in range(6):
        j = (i + 1) % 6
        c = rng.standard_normal((3, 3))
        op = np.einsum("pq,pab,qcd->acbd", c, basis[1:], basis[1:]).reshape(4, 4)
        key = (min(i, j), max(i, j))
        blocks[key] = op
        want_norms[key] = np.linalg.norm(op, ord=2)
    rho, h, log_z = planted_state(blocks)
    b = BoundaryState.from_density(rho, site_dim=2)
    # the logm round trip leaves ~1e-12 dust on absent pairs; floor it
    fit = gibbs_fit(b, norm_floor=1e-9)
    assert fit.support_rank == 64 and not fit.support_deficient
    assert abs(fit.identity_coefficient - log_z) < 1e-9
    assert max(fit.single_norms) < 1e-9
    got = fit.two_body_norms()
    for key, want in want_norms.items():
        assert abs(got[key] - want) < 1e-9 * max(1.0, want), key
    for (i, j), norm in got.items():
        if loop_distance(i, j, 6) > 1:
            assert norm < 1e-9, (i, j)
    # every surviving pair is at distance one, so alpha degenerates
    assert fit.alpha == float("inf")
    logs = [np.log(n) for n in want_norms.values()]
    assert abs(fit.J - np.exp(np.mean(logs))) < 1e-9


def test_gibbs_fit_exact_exponential_decay():
    basis = hermitian_basis(2)
    b1 = np.kron(basis[1], basis[1])  # operator norm 1/2
    J, alpha = 0.8, 0.9
    blocks = {}
    for i in range(6):
        for j in range(i + 1, 6):
            dist = loop_distance(i, j, 6)
            if dist in (1, 2):
                blocks[(i, j)] = 2.0 * J * np.exp(-alpha * dist) * b1
    rho, _, _ = planted_state(blocks)
    fit = gibbs_fit(BoundaryState.from_density(rho, site_dim=2))
    assert abs(fit.J - J) < 1e-8
    assert abs(fit.alpha - alpha) < 1e-8
    assert fit.residual < 1e-9


def test_gibbs_fit_needs_three_distances():
    b = boundary_state(injective_peps_site(bond=2, seed=1), 1, 2)
    with pytest.raises(ValueError, match="need 3"):
        gibbs_fit(b)


def test_gibbs_fit_flags_deficient_support():
    rho = np.zeros((64, 64), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    fit = gibbs_fit(BoundaryState.from_density(rho, site_dim=2))
    assert fit.support_deficient
    assert fit.support_rank == 2

"""Tests for the detectability-lemma operator and its MPO form.

The matrix-free application is compared against dense layer products built
by explicit kron embedding.
"""

import numpy as np
import pytest

import tnlab.detectability as dt
from tnlab.constants import SizeLimitError
from tnlab.detectability import (
    DlOperator,
    dl_apply,
    dl_as_mpo,
    dl_bound_check,
    ground_data,
)
from tnlab.models import aklt_site, ising_pair_projector
from tnlab.parent import parent_term


def kron_embed(term, sites, d, total):
    k = len(sites)
    full = np.kron(term, np.eye(d ** (total - k)))
    order = list(sites) + [s for s in range(total) if s not in sites]
    perm = np.argsort(order)
    t = full.reshape((d,) * (2 * total))
    t = t.transpose(list(perm) + [total + p for p in perm])
    return t.reshape(d ** total, d ** total)


def dense_dl(dl, ell):
    """Oracle: one DL step is the odd layer then the even layer."""
    d, L = dl.phys_dim, dl.L
    layer = {}
    for parity in ("odd", "even"):
        m = np.eye(d ** L, dtype=complex)
        for (i, j) in dl.layer_pairs(parity):
            m = kron_embed(dl.q, [i, j], d, L) @ m
        layer[parity] = m
    step = layer["even"] @ layer["odd"]
    return np.linalg.matrix_power(step, ell)


def aklt_pair():
    return parent_term(aklt_site(), 2).term


def test_constructor_validation():
    q = ising_pair_projector()
    with pytest.raises(ValueError, match="even"):
        DlOperator(q, 5)
    with pytest.raises(ValueError, match="at least 4"):
        DlOperator(q, 2)
    with pytest.raises(ValueError, match="projector"):
        DlOperator(2.0 * q, 4)
    with pytest.raises(ValueError, match="perfect square"):
        DlOperator(np.eye(5), 4)


def test_layer_pairs_cover_ring():
    dl = DlOperator(ising_pair_projector(), 6)
    assert dl.layer_pairs("even") == [(0, 1), (2, 3), (4, 5)]
    assert dl.layer_pairs("odd") == [(1, 2), (3, 4), (5, 0)]


def test_dl_apply_matches_dense_oracle():
    for term, d in ((ising_pair_projector(), 2), (aklt_pair(), 3)):
        dl = DlOperator(term, 4)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(d ** 4) + 1j * rng.standard_normal(d ** 4)
        for ell in (1, 2):
            want = dense_dl(dl, ell) @ v
            assert np.allclose(dl_apply(dl, ell, v), want, atol=1e-10), (d, ell)
        want_adj = dense_dl(dl, 1).conj().T @ v
        assert np.allclose(dl_apply(dl, 1, v, adjoint=True), want_adj, atol=1e-10)


def test_dl_apply_validates_size():
    dl = DlOperator(ising_pair_projector(), 4)
    with pytest.raises(ValueError, match="entries"):
        dl_apply(dl, 1, np.ones(7))


def test_ground_data_is_fixed_by_dl():
    dl = DlOperator(aklt_pair(), 4)
    vecs, gap = ground_data(dl)
    assert vecs.shape[1] == 1
    assert abs(gap - 1.0 / 3.0) < 1e-9  # exact dense value at L=4
    fixed = dl_apply(dl, 1, vecs[:, 0])
    assert np.linalg.norm(fixed - vecs[:, 0]) < 1e-9


def test_bound_check_ising_is_exact_projector():
    # all Ising layer factors commute, so DL^ell equals the ground projector
    dl = DlOperator(ising_pair_projector(), 6)
    for ell in (1, 3):
        report = dl_bound_check(dl, ell)
        assert report.lhs < 1e-12
        assert abs(report.gap - 2.0) < 1e-10
        assert report.ground_degeneracy == 2
        assert report.degenerate_ground_space
        assert abs(report.rhs - 1.5 ** (-ell / 2.0)) < 1e-12
        assert report.satisfied
        assert report.margin > 0


def test_bound_check_aklt_matches_dense_norm():
    dl = DlOperator(aklt_pair(), 4)
    vecs, _ = ground_data(dl)
    proj = vecs @ vecs.conj().T
    for ell in (1, 2):
        report = dl_bound_check(dl, ell)
        want = np.linalg.norm(proj - dense_dl(dl, ell), ord=2)
        assert abs(report.lhs - want) < 1e-9
        assert report.satisfied
    # frozen regression value: one DL step at L=4 contracts to 2/3
    assert abs(dl_bound_check(dl, 1).lhs - 2.0 / 3.0) < 1e-8


def test_bound_check_sparse_path_matches_dense_path():
    dl = DlOperator(aklt_pair(), 4)
    dense = dl_bound_check(dl, 2)
    old = dt.DENSE_NORM_MAX
    dt.DENSE_NORM_MAX = 1
    try:
        sparse = dl_bound_check(dl, 2)
    finally:
        dt.DENSE_NORM_MAX = old
    assert abs(dense.lhs - sparse.lhs) < 1e-8


def test_bound_check_accepts_precomputed_ground():
    dl = DlOperator(aklt_pair(), 4)
    ground = ground_data(dl)
    a = dl_bound_check(dl, 1, ground=ground)
    b = dl_bound_check(dl, 1)
    assert a.lhs == b.lhs and a.gap == b.gap


def test_mpo_matches_dense_power_and_bond_bound():
    for term, d, ells in ((ising_pair_projector(), 2, (1, 2)), (aklt_pair(), 3, (1,))):
        dl = DlOperator(term, 4)
        for ell in ells:
            mpo = dl_as_mpo(dl, ell)
            assert max(mpo.bond_dims) <= d ** (2 * ell)
            assert np.allclose(mpo.to_dense(), dense_dl(dl, ell), atol=1e-9), (d, ell)


def test_mpo_entry_cap():
    dl = DlOperator(aklt_pair(), 4)
    with pytest.raises(SizeLimitError):
        dl_as_mpo(dl, 12)

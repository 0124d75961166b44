"""Tests for group specs, symmetry checks, virtual actions, and the
projective-class invariant.

The cluster and AKLT chains are the known nontrivial examples; product
states and single-Z2 restrictions must come out trivial.  A planted
complex-unitary conjugation guards the extraction against conjugation
mistakes that real test matrices cannot see.
"""

import itertools

import numpy as np
import pytest

from tnlab.linalg import rng_stream
from tnlab.models import (
    PAULI_X,
    PAULI_Z,
    aklt_site,
    aklt_symmetry,
    cluster_blocked_site,
    cluster_symmetry,
    product_site,
)
from tnlab.mps import site_matrices, site_tensor
from tnlab.symmetry import (
    GroupSpec,
    check_symmetry,
    cocycle_table,
    cohomology_class,
    complete_representation,
    cyclic_group,
    extract_vg,
    spt_classify,
    z2z2_group,
)


def s3_group():
    perms = list(itertools.permutations(range(3)))
    labels = ["".join(str(x) for x in p) for p in perms]
    def compose(p, q):
        return tuple(p[q[k]] for k in range(3))
    table = [[perms.index(compose(p, q)) for q in perms] for p in perms]
    return GroupSpec(tuple(labels), tuple(tuple(r) for r in table))


def phase_distance(a, b):
    """Distance between matrices up to a global phase."""
    overlap = np.trace(a.conj().T @ b) / a.shape[0]
    if abs(overlap) == 0:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(b - overlap / abs(overlap) * a))


def test_group_spec_z2z2():
    g = z2z2_group()
    assert g.order == 4
    assert g.identity == "e"
    assert g.is_abelian
    assert g.multiply("a", "b") == "ab"
    assert g.multiply("ab", "a") == "b"
    assert g.inverse("ab") == "ab"
    assert g.generated_by(["a", "b"]) == {"e", "a", "b", "ab"}
    assert g.generated_by(["a"]) == {"e", "a"}


def test_group_spec_cyclic_and_s3():
    c3 = cyclic_group(3)
    assert c3.order == 3 and c3.is_abelian
    assert c3.multiply("g1", "g2") == "g0"
    s3 = s3_group()
    assert s3.order == 6
    assert not s3.is_abelian


def test_group_spec_validation():
    with pytest.raises(ValueError, match="identity"):
        GroupSpec(("a", "b"), ((0, 0), (0, 0)))
    with pytest.raises(ValueError, match="distinct"):
        GroupSpec(("a", "a"), ((0, 1), (1, 0)))
    with pytest.raises(ValueError, match="table"):
        GroupSpec(("a", "b"), ((0, 1),))


def test_complete_representation_cluster():
    g = z2z2_group()
    rep = complete_representation(g, cluster_symmetry())
    assert set(rep) == {"e", "a", "b", "ab"}
    assert np.allclose(rep["e"], np.eye(4))
    assert np.allclose(rep["ab"], np.kron(PAULI_X, PAULI_X))


def test_complete_representation_errors():
    g = z2z2_group()
    with pytest.raises(ValueError, match="do not generate"):
        complete_representation(g, {"a": PAULI_X})
    with pytest.raises(ValueError, match="inconsistent"):
        complete_representation(g, {"a": np.diag([1.0, 1j]), "b": PAULI_X})


def test_check_symmetry_cluster_flips():
    site = cluster_blocked_site()
    for u in cluster_symmetry().values():
        check = check_symmetry(site, u, sizes=(2, 3))
        assert check.ok
        for phase in check.phases:
            assert abs(abs(phase) - 1.0) < 1e-10


def test_check_symmetry_detects_broken_symmetry():
    site = cluster_blocked_site()
    u = np.diag([1.0, 1.0, 1.0, 1j])
    check = check_symmetry(site, u, sizes=(3,))
    assert not check.ok


def test_extract_vg_aklt_pauli_actions():
    sym = aklt_symmetry()
    # AKLT blocks to length 2 before extraction
    from tnlab.mps import block_sites

    blocked = block_sites(aklt_site(), 2)
    for name, want in (("x", PAULI_X), ("z", PAULI_Z)):
        u = np.kron(sym[name], sym[name])
        action = extract_vg(blocked, u)
        assert action is not None
        assert action.residual < 1e-10
        assert phase_distance(want, action.v) < 1e-8


def test_extract_vg_rejects_non_symmetry():
    from tnlab.mps import block_sites

    blocked = block_sites(aklt_site(), 2)
    rng = rng_stream(0, 102)
    u, _ = np.linalg.qr(rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))
    assert extract_vg(blocked, u) is None


def test_extract_vg_requires_normal_tensor():
    mats = np.zeros((2, 2, 2), dtype=complex)
    mats[0] = np.diag([1.0, 0.0])
    mats[1] = np.diag([0.0, 1.0])
    with pytest.raises(ValueError, match="not normal"):
        extract_vg(site_tensor(mats), PAULI_X)


def test_spt_cluster_is_nontrivial():
    rep = complete_representation(z2z2_group(), cluster_symmetry())
    report = spt_classify(cluster_blocked_site(), z2z2_group(), rep)
    assert report.class_label == "nontrivial"
    assert not report.trivial
    assert report.block_length == 1
    assert abs(report.beta[("a", "b")] + 1.0) < 1e-10
    assert abs(report.beta[("b", "a")] + 1.0) < 1e-10
    assert abs(report.beta[("a", "a")] - 1.0) < 1e-10
    assert report.residual < 1e-8


def test_spt_aklt_is_nontrivial_with_pauli_virtuals():
    sym = aklt_symmetry()
    rep = complete_representation(z2z2_group(), {"a": sym["x"], "b": sym["z"]})
    report = spt_classify(aklt_site(), z2z2_group(), rep)
    assert report.class_label == "nontrivial"
    assert report.block_length == 2
    assert abs(report.beta[("a", "b")] + 1.0) < 1e-10
    assert phase_distance(PAULI_X, report.virtual["a"]) < 1e-8
    assert phase_distance(PAULI_Z, report.virtual["b"]) < 1e-8


def test_spt_product_state_is_trivial():
    plus = np.ones(2) / np.sqrt(2.0)
    site = product_site(np.kron(plus, plus))
    rep = complete_representation(z2z2_group(), cluster_symmetry())
    report = spt_classify(site, z2z2_group(), rep)
    assert report.trivial
    assert report.residual < 1e-10
    assert all(abs(b - 1.0) < 1e-10 for b in report.beta.values())


def test_spt_single_z2_restriction_is_trivial():
    # the cluster state keeps its symmetry under one sublattice flip alone,
    # but a single Z2 cannot carry the invariant
    g = cyclic_group(2)
    rep = {"g0": np.eye(4), "g1": cluster_symmetry()["a"]}
    report = spt_classify(cluster_blocked_site(), g, rep)
    assert report.trivial


def test_spt_conjugated_aklt_keeps_class_and_complex_virtuals():
    """Rotating the physical leg and regauging must not change the class."""
    rng = rng_stream(0, 101)
    w, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    y, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    a = site_matrices(aklt_site())
    moved = np.einsum("ij,ab,jbc,cd->iad", w, y.conj().T, a, y)
    site = site_tensor(moved)
    sym = aklt_symmetry()
    rep = complete_representation(
        z2z2_group(),
        {"a": w @ sym["x"] @ w.conj().T, "b": w @ sym["z"] @ w.conj().T},
    )
    report = spt_classify(site, z2z2_group(), rep)
    assert report.class_label == "nontrivial"
    assert abs(report.beta[("a", "b")] + 1.0) < 1e-8
    # the extracted virtuals are the regauged Paulis, genuinely complex now
    assert phase_distance(y.conj().T @ PAULI_X @ y, report.virtual["a"]) < 1e-7
    assert phase_distance(y.conj().T @ PAULI_Z @ y, report.virtual["b"]) < 1e-7


def test_beta_is_invariant_under_phase_regauging():
    g = z2z2_group()
    virtual = {"e": np.eye(2), "a": PAULI_X, "b": PAULI_Z, "ab": PAULI_X @ PAULI_Z}
    omega, _ = cocycle_table(g, virtual)
    beta, label = cohomology_class(g, omega)
    rng = np.random.default_rng(3)
    phased = {k: np.exp(2j * np.pi * rng.random()) * v for k, v in virtual.items()}
    omega2, _ = cocycle_table(g, phased)
    beta2, label2 = cohomology_class(g, omega2)
    assert label == label2 == "nontrivial"
    for key in beta:
        assert abs(beta[key] - beta2[key]) < 1e-12
        # omega itself is gauge dependent, beta is the invariant
    assert any(abs(omega[k] - omega2[k]) > 1e-6 for k in omega)


def test_cocycle_table_rejects_inconsistent_virtuals():
    g = z2z2_group()
    virtual = {"e": np.eye(2), "a": PAULI_X, "b": PAULI_Z, "ab": np.eye(2)}
    with pytest.raises(ValueError, match="not proportional"):
        cocycle_table(g, virtual)


def test_spt_classify_input_validation():
    g = z2z2_group()
    rep = complete_representation(g, cluster_symmetry())
    bad = dict(rep)
    bad["a"] = np.diag([1.0, 2.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="not unitary"):
        spt_classify(cluster_blocked_site(), g, bad)
    bad = dict(rep)
    bad["ab"] = np.eye(4)
    with pytest.raises(ValueError, match="homomorphism"):
        spt_classify(cluster_blocked_site(), g, bad)
    with pytest.raises(ValueError, match="abelian"):
        s3 = s3_group()
        spt_classify(cluster_blocked_site(), s3, {k: np.eye(4) for k in s3.labels})


def test_spt_classify_rejects_non_symmetry():
    g = cyclic_group(2)
    rep = {"g0": np.eye(4), "g1": np.diag([1.0, -1.0, 1.0, -1.0])}
    with pytest.raises(ValueError, match="not a symmetry"):
        spt_classify(cluster_blocked_site(), g, rep)

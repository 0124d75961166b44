"""Desk-scale numerical laboratory for tensor-network states.

Dense MPS/PEPS manipulation with named indices, quantum-channel
primitivity and Wielandt-type index bounds, parent Hamiltonians with exact
low spectra, the detectability-lemma operator and its MPO form, PEPS
boundary states with Gibbs-decay fits, and abelian SPT classification via
the cocycle invariant.  Everything is exact diagonalization at small size;
the size caps in :mod:`tnlab.constants` mark the intended range.
"""

__version__ = "0.1.0"

from .channels import (
    IndexReport,
    QuantumChannel,
    SpectralCertificate,
    StochasticMatrix,
    classical_primitivity_index,
    classical_wielandt_bound,
    embed_stochastic,
    injectivity_index_mps,
    is_primitive,
    pattern_scan,
    primitivity_index,
    transfer_channel,
    wielandt_matrix,
    wielandt_pattern,
)
from .detectability import DlOperator, dl_as_mpo, dl_bound_check
from .mps import (
    Mpo,
    Mps,
    block_sites,
    entanglement_entropy,
    expectation_value,
    find_gauge,
    from_dense,
    gauge_transform,
    site_tensor,
)
from .parent import (
    LocalHamiltonian,
    RegionMap,
    assemble,
    frustration_check,
    gamma_map,
    gap_series,
    low_spectrum,
    parent_term,
)
from .peps import (
    BoundaryState,
    GibbsFit,
    boundary_state,
    gibbs_fit,
    peps_contract,
    peps_gamma,
    peps_injectivity_index,
)
from .symmetry import (
    GroupSpec,
    SptReport,
    check_symmetry,
    cyclic_group,
    extract_vg,
    spt_classify,
    z2z2_group,
)
from .tensor import Tensor, contract, contract_network, factorize, group_indices

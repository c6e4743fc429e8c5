"""First-order modified information bounds on truncated Fock spaces."""

from .bounds import (
    BoundReport,
    bound_report,
    cramer_rao_modified,
    generalized_qfi_direct,
    generalized_qfi_expanded,
    heisenberg_limit_modified,
    lloyd_rate_modified,
    mandelstam_tamm_modified,
    margolus_levitin_modified,
    statistical_distance,
)
from .hilbert import (
    DensityMatrix,
    FockOperator,
    SpectralDecomposition,
    StateVector,
    coherent_state,
    density_from_probs,
    expectation,
    hermitian_eigendecompose,
    ladder_ops,
    momentum_op,
    oscillator_hamiltonian,
    position_op,
)
from .nonlocal_model import (
    AppendixQuantities,
    NonlocalModel,
    appendix_quantities,
    hamiltonians,
    heisenberg_dt,
    oracle_energy_audit,
    tmin_bound,
)
from .perturbation import (
    DeformedDensity,
    DeformedOperator,
    DeformedState,
    assemble_deformed_density,
    deformed_variance,
    modified_variation,
    pure_deformed_density,
    rayleigh_first_order,
    variance_parts,
)

__version__ = "0.1.0"

"""Gain/loss spin-boson chain on a Fock-state lattice.

The driven Jaynes-Cummings Hamiltonian ``J1 sx + J2 (a^dag s- + a s+)`` is a
semi-infinite SSH chain whose hoppings grow like ``sqrt(n)``.  A displacement
by ``alpha = -J1/J2`` reduces it to the bare JC model, which makes the
Hermitian and the balanced gain/loss problems solvable block by block.  This
package builds those closed-form eigensystems, propagates states with them,
and checks everything against brute-force dense matrices.
"""

from .errors import (
    ConfigError,
    CutoffTooSmall,
    DegenerateState,
    EpProjectionUnsupported,
    EpUnresolvable,
    FockSSHError,
    IntegratorStall,
    InvariantViolation,
    NotReached,
    NumericalGuardError,
    ReconstructionFailure,
    ZeroOverlap,
)
from .fock import (
    DOWN,
    UP,
    FockCutoff,
    ModelParams,
    OperatorMatrix,
    SpinBosonState,
    basis_state,
    build_displacement,
    build_hamiltonian,
    build_ladder_ops,
    coherent_state,
    default_cutoff,
    displaced_fock_state,
    displacement_boson,
    spin_operator,
)
from .spectra import (
    analytic_hermitian_spectrum,
    compare_to_dense,
    isotropic_ssh_spectrum,
    verify_chiral_symmetry,
    zero_mode_profile,
)
from .nonhermitian import (
    BiorthoEigenSystem,
    PTPhase,
    analytic_nh_spectrum,
    classify_pt_phase,
    eigenstate_entropy,
    subspace_block,
    verify_pt_symmetry,
)
from .dynamics import (
    TimeSeries,
    bound_probability,
    dissipative_equivalence_check,
    eigenmode_projections,
    evolve_analytic,
    evolve_oracle,
    expand_initial_state,
    fock_observables,
    observe,
    stabilization_time,
)
from .config import ScenarioConfig, load_config
from .scenarios import emit_figure_bundle, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CutoffTooSmall",
    "DegenerateState",
    "EpProjectionUnsupported",
    "EpUnresolvable",
    "FockSSHError",
    "IntegratorStall",
    "InvariantViolation",
    "NotReached",
    "NumericalGuardError",
    "ReconstructionFailure",
    "ZeroOverlap",
    "DOWN",
    "UP",
    "FockCutoff",
    "ModelParams",
    "OperatorMatrix",
    "SpinBosonState",
    "basis_state",
    "build_displacement",
    "build_hamiltonian",
    "build_ladder_ops",
    "coherent_state",
    "default_cutoff",
    "displaced_fock_state",
    "displacement_boson",
    "spin_operator",
    "analytic_hermitian_spectrum",
    "compare_to_dense",
    "isotropic_ssh_spectrum",
    "verify_chiral_symmetry",
    "zero_mode_profile",
    "BiorthoEigenSystem",
    "PTPhase",
    "analytic_nh_spectrum",
    "classify_pt_phase",
    "eigenstate_entropy",
    "subspace_block",
    "verify_pt_symmetry",
    "TimeSeries",
    "bound_probability",
    "dissipative_equivalence_check",
    "eigenmode_projections",
    "evolve_analytic",
    "evolve_oracle",
    "expand_initial_state",
    "fock_observables",
    "observe",
    "stabilization_time",
    "ScenarioConfig",
    "load_config",
    "emit_figure_bundle",
    "run_scenario",
]

"""Optimal state encodings and boundary controls for quantum communication over spin networks."""

__version__ = "0.1.0"

from .errors import ConfigError, NetworkError, NumericalInvariantError, SpinwireError
from .network import (
    ChainSpec,
    CouplingKind,
    SpinNetwork,
    build_network,
    chain_from_couplings,
    load_network,
    random_chain_couplings,
)
from .subspace import ExcitationBasis, RestrictedHamiltonian, embed_state, restrict_hamiltonian
from .propagator import (
    SpectralPropagator,
    Trajectory,
    diagonalize,
    evolve,
    sample_trajectory,
    step_piecewise,
)
from .encoder import (
    ControlSubspaceProjector,
    EncodingSolution,
    TransferOutcome,
    average_fidelity,
    fidelity_bounds,
    group_velocity,
    multi_subspace_optimum,
    optimal_encoding,
    projected_propagator,
    sweep_times,
    transfer_outcome,
)
from .controller import (
    ControlSchedule,
    PhantomExtension,
    build_phantom_system,
    derive_controls,
    shadow_residual,
    uncontrolled_baseline,
)
from .entanglement import (
    LeakSpec,
    TwoQubitState,
    concurrence,
    decoded_joint_state,
    verify_concurrence_identity,
)

__all__ = [
    "ChainSpec",
    "ConfigError",
    "ControlSchedule",
    "ControlSubspaceProjector",
    "CouplingKind",
    "EncodingSolution",
    "ExcitationBasis",
    "LeakSpec",
    "NetworkError",
    "NumericalInvariantError",
    "PhantomExtension",
    "RestrictedHamiltonian",
    "SpectralPropagator",
    "SpinNetwork",
    "SpinwireError",
    "Trajectory",
    "TransferOutcome",
    "TwoQubitState",
    "average_fidelity",
    "build_network",
    "build_phantom_system",
    "chain_from_couplings",
    "concurrence",
    "decoded_joint_state",
    "derive_controls",
    "diagonalize",
    "embed_state",
    "evolve",
    "fidelity_bounds",
    "group_velocity",
    "load_network",
    "multi_subspace_optimum",
    "optimal_encoding",
    "projected_propagator",
    "random_chain_couplings",
    "restrict_hamiltonian",
    "sample_trajectory",
    "shadow_residual",
    "step_piecewise",
    "sweep_times",
    "transfer_outcome",
    "uncontrolled_baseline",
    "verify_concurrence_identity",
]

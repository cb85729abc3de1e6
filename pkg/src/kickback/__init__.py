"""kickback: decoherence mechanisms on a two-way interferometer.

Two mathematically equivalent channels remove way coherence: averaging over
classical random phase kicks and entangling with an environment that gets
traced out. This package implements both as executable channels, converts
either representation into the other, performs quantum erasure on the
entangled picture, and verifies the coherent-state phase-integral
constructions on a truncated Fock space.
"""

from .dephase import (
    AtomWeight,
    GridWeight,
    PhaseWeight,
    SewCosineWeight,
    WindowWeight,
    apply_phase_kicks,
    check_normalized,
    delta_pair_weight,
    epsilon_of_weight,
    sample_kick,
    sample_kicks,
    sew_weight,
    shard_rng,
    window_weight,
)
from .entangle import (
    EnvironmentModel,
    canonical_two_level,
    controlled_coupling,
    entangle_joint,
    epsilon_of_env,
    random_density,
    random_environment_model,
    random_unitary,
    reduced_system,
)
from .equivalence import (
    Certificate,
    certify_equivalence,
    env_to_weight,
    weight_to_env,
)
from .eraser import (
    ClassicalSortReport,
    EnvBasis,
    ErasureReport,
    Subensemble,
    classical_sort_control,
    computational_basis,
    eigen_erasure_basis,
    erasure_report,
    full_visibility_theta,
    sort_subensembles,
)
from .fock import (
    FockVector,
    SewParams,
    coherent_state,
    phase_integral_inner_product,
    resolution_check,
    sew_epsilon_bridge,
    sew_overlap,
)
from .qcore import (
    DensityOperator,
    Epsilon,
    FringePattern,
    UnitaryOperator,
    Visibility,
    WaySuperposition,
    dephased_density,
    fringe_extremes,
    fringe_fourier_visibility,
    fringe_probability,
    maximally_mixed,
    partial_trace_env,
    probe_projector,
    superposition_state,
    tensor_product,
    uniform_phase_grid,
    visibility,
    wrap_phase,
)
from .scenario import (
    RunResult,
    Scenario,
    ScenarioError,
    parse_scenario,
    run_analytic,
    run_monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "AtomWeight",
    "Certificate",
    "ClassicalSortReport",
    "DensityOperator",
    "EnvBasis",
    "EnvironmentModel",
    "Epsilon",
    "ErasureReport",
    "FockVector",
    "FringePattern",
    "GridWeight",
    "PhaseWeight",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "SewCosineWeight",
    "SewParams",
    "Subensemble",
    "UnitaryOperator",
    "Visibility",
    "WaySuperposition",
    "WindowWeight",
    "apply_phase_kicks",
    "canonical_two_level",
    "certify_equivalence",
    "check_normalized",
    "classical_sort_control",
    "coherent_state",
    "computational_basis",
    "controlled_coupling",
    "delta_pair_weight",
    "dephased_density",
    "eigen_erasure_basis",
    "entangle_joint",
    "env_to_weight",
    "epsilon_of_env",
    "epsilon_of_weight",
    "erasure_report",
    "fringe_extremes",
    "fringe_fourier_visibility",
    "fringe_probability",
    "full_visibility_theta",
    "maximally_mixed",
    "parse_scenario",
    "partial_trace_env",
    "phase_integral_inner_product",
    "probe_projector",
    "random_density",
    "random_environment_model",
    "random_unitary",
    "reduced_system",
    "resolution_check",
    "run_analytic",
    "run_monte_carlo",
    "sample_kick",
    "sample_kicks",
    "sew_epsilon_bridge",
    "sew_overlap",
    "sew_weight",
    "shard_rng",
    "sort_subensembles",
    "superposition_state",
    "tensor_product",
    "uniform_phase_grid",
    "visibility",
    "weight_to_env",
    "window_weight",
    "wrap_phase",
]

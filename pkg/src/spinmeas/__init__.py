"""Approximate joint measurements of spin-1 projections: POVMs, error
metrics, Kochen-Specker colourability, and misalignment experiments."""

from .contextsim import (
    CORRELATED,
    INDEPENDENT,
    AlignmentDistribution,
    ConstantValuation,
    ExperimentReport,
    HashValuation,
    HemisphereValuation,
    NearestRayValuation,
    Valuation,
    contextuality_experiment,
    default_valuation,
    estimate_p,
    find_illegal_triad,
    hidden_illegal_probability,
    induced_valuation,
    sample_actual_axis,
    sample_actual_triad,
)
from .errmetrics import (
    ErrorReport,
    errors_heisenberg,
    predictive_error_povm,
    retrodictive_error_povm,
    small_angle_errors,
    spread_bound,
    triad_error_reports,
)
from .kscolor import (
    Coloring,
    OrthoStructure,
    RaySet,
    Unsatisfiable,
    check_coloring,
    find_legal_coloring,
    ortho_structure,
    peres_rays,
)
from .linalg import (
    TOL,
    Tolerances,
    exp_i,
    hermitian_eig,
    is_hermitian,
    is_psd,
    is_unitary,
    operator_norm,
    polar_unitary,
    tensor,
)
from .measurement import (
    ILLEGAL_OUTCOMES,
    LEGAL_OUTCOMES,
    MeasurementModel,
    PointerSpace,
    Povm,
    contemporaneous_unitary,
    kraus_operators,
    marginal_povm,
    outcome_probabilities,
    perturbed_single_measurement,
    pointer_observable,
    pointer_sigma,
    povm,
    sequential_unitary,
    single_ideal_unitary,
    small_angle_povm_elements,
)
from .spin1 import (
    Triad,
    angular_momentum_ops,
    canonical_angles,
    orthonormality_defect,
    squared_projection,
    triad_from_angles,
)

__version__ = "0.1.0"

"""Finite-dimensional quantum measurement theory on dense matrices.

States, observables, POMs and instruments; precision and resolution;
joint-measurement and standard-quantum-limit bounds; a ``qmeter`` CLI.
"""
from .config import ConfigError, ScenarioConfig, parse_config
from .joint import (
    JointPom,
    JointReport,
    NoiseOperator,
    interacting_realization,
    joint_uncertainty_report,
    jxy,
    marginals,
    noise_commutator,
    noise_operators,
)
from .metrics import (
    BiasError,
    BoundCheck,
    CompatibilityError,
    PrecisionParts,
    SupportVerdict,
    compatible_joint,
    diagonal_support_test,
    equals_observable,
    holevo_check,
    is_compatible,
    is_unbiased,
    moment,
    operator_variance,
    precision,
    precision_decomposition,
    precision_vanishes,
    robertson_check,
    spread,
)
from .model import (
    DensityState,
    Distribution,
    Hamiltonian,
    Instrument,
    MeasurementScheme,
    Observable,
    Pom,
    PosteriorEntry,
    PosteriorFamily,
    ValidationError,
    apply_operation,
    associated_pom,
    born_distribution,
    choi_distance,
    choi_matrix,
    evolve,
    naimark_dilate,
    pom_equals,
    posterior_family,
    realize_instrument,
    scheme_to_instrument,
    sequential_distribution,
    timed_sequential_distribution,
)
from .models import ModelError, build_model, luders, measure_prepare, rotation_z_to_x, unsharp, von_neumann
from .operators import DimensionError, commutator_trace, complete_isometry, partial_trace, spectral_pvm
from .repeated import (
    SqlReport,
    conditional_uncertainty,
    heisenberg,
    predictive_uncertainty,
    predictor,
    resolution,
    resolution_decomposition,
    sql_report,
)
from .report import Report, emit_report
from .runner import ScenarioError, run_scenario
from .search import SearchResult, sql_violation_search
from .suites import SUITES, SuiteResult, run_suite

__version__ = "0.1.0"

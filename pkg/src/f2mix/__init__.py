"""Learning a mixture of two linear subspaces of GF(2)^n from samples."""

from .comparability import ComparabilityParams, test_comparability
from .errors import (
    BaseCaseFailed,
    ConfigError,
    DimensionMismatch,
    EmptyHypothesisList,
    F2MixError,
    InfeasibleSpec,
    InsufficientSamples,
    InvalidParams,
    LengthMismatch,
    ProjectionStalled,
    Unidentifiable,
)
from .gf2 import (
    GF2Matrix,
    GF2Vector,
    Subspace,
    canonical_basis,
    contains,
    intersect,
    is_subset,
    kernel,
    random_matrix,
    random_subspace,
    rank,
    sample_uniform,
    solve,
    subspace_sum,
)
from .harness import ExperimentConfig, ExperimentReport, Instance, InstanceSpec, gen_instance, make_instance, run_experiment
from .hypothesis import HypothesisList, choose_right_hypothesis, scheffe_mass
from .lpn import LpnOracle, brute_force_lpn, lpn_draw, lpn_to_mixture, mixture_to_lpn
from .oracle import MixtureOracle, ProjectedOracle, estimate_weights, project
from .poly import (
    MonomialLift,
    QuadraticPoly,
    SubspaceMixtureDistribution,
    count_vanishing_quadratics,
    eval_quadratic,
    exact_density,
    exact_tv,
    lift,
)
from .recovery import (
    LargeDiffParams,
    RecoveryResult,
    Regime,
    dependent_index_set,
    find_good_projector,
    incomparable_subspace_recovery,
    large_diff_recovery,
    recover_base_case,
    recover_driver,
)

__version__ = "0.1.0"

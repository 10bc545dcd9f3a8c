"""Subordinators on abelian monoids with countable character families.

Build increasing-increment Markov paths from marked Poisson point processes
on a monoid, evaluate their closed-form laws (marginals, finite-dimensional
distributions, character-functional moments, time-change composition), and
verify every identity by reproducible Monte Carlo with distribution-free
confidence bounds.
"""

from .core import (
    INFINITY,
    AlphaEstimate,
    BoundedValue,
    CharacterId,
    DegenerateRatioError,
    ExtrapolationConfig,
    MonoidInstance,
    NoActionError,
    NonConvergentError,
    PointAtInfinity,
    SumDiagnosis,
    SumDiagnosisConfig,
    alpha_coefficient,
    oplus_fold,
    partition_additivity_check,
    phi,
    rho_distance,
    sum_diagnosis,
)
from .instances import (
    AdditiveReals,
    InvalidSpecError,
    LatticeUnion,
    MarkDistribution,
    MaxReals,
    NoClosedFormError,
    char_closed_form_integral,
    make_instance,
    mark_distribution,
    rational_index,
    rational_weight_sum,
)
from .ppp import (
    LevyMeasure,
    LevyMeasureLayer,
    PointRealization,
    integral_one_minus_chi,
    sample_layer,
    sample_ppp,
    stable_layers,
)
from .subordinator import (
    DegenerateRateError,
    DriftUnsupportedError,
    HorizonExceededError,
    LaplaceExponent,
    OutOfHorizonError,
    PathRealization,
    bochner_subordinate,
    character_functional,
    dump_paths_csv,
    fdd_closed_form,
    laplace_exponent_eval,
    levy_ito_path,
    moments_closed_form,
    path_at,
    path_from_points,
    sample_ensemble,
)
from .verify import (
    EmptyEnsembleError,
    Estimate,
    VerificationReport,
    estimate_laplace,
    hoeffding_halfwidth,
)

__version__ = "0.1.0"

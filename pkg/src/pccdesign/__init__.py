"""Planning toolkit for resource-efficient outcome-label collection.

Estimates information response surfaces over score-stratified sampling
configurations, fits recalibration/revision models on resulting samples,
and quantifies power and support-recovery benefits against simple random
sampling.
"""

from .datagen import (
    Cohort,
    ModificationParams,
    NULL_MODIFICATION,
    SourceModel,
    compute_scores,
    generate_lda_cohort,
    generate_outcomes,
)
from .experiments import (
    PCC_SIM,
    PowerCurve,
    RevisionResult,
    Scenario,
    run_power_experiment,
    run_revision_experiment,
    run_robustness_study,
)
from .information import (
    ComparisonReport,
    compare_designs,
    expit,
    phi_b,
    phi_d,
    predicted_probs,
    recal_info_matrix,
)
from .modlearn import (
    LassoPath,
    LrtResult,
    RecalConstraint,
    RecalFit,
    RecoveryCurve,
    fit_lasso_path,
    fit_recalibration,
    recalibration_tests,
    support_recovery,
    support_recovery_alt,
)
from .sampling import (
    DesignConfig,
    InfeasibleDesignError,
    Sample,
    inclusion_weight,
    max_feasible_n,
    pcc_sample,
    srs_sample,
)
from .surface import (
    BIN_ENT,
    D_OPT,
    GridSpec,
    InfoSurface,
    default_grid,
    estimate_surface,
    estimate_surface_pair,
    surface_argmax,
)

__version__ = "0.1.0"

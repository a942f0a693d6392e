"""Prevalence-weighted quadric classification boundaries with level-set
uncertainty quantification for diagnostic assay data.

The workflow in one paragraph: fit a quadric decision boundary to labeled
training data by minimizing a prevalence-weighted, tanh-smoothed
misclassification error, walking the smoothing scale down a geometric
schedule so each solve seeds the next (``homotopy_run``); estimate the
prevalence of an unlabeled test set from indicator rates over the fitted
positive region without classifying anyone (``two_pass_classify``); and fit
a monotone family of boundaries over a prevalence grid whose class-switch
location brackets each point's class probability (``fit_levelsets``,
``prevalence_function_query``, ``local_accuracy``).

Hot kernels run in a compiled extension when available, with a NumPy
fallback selected at import; see ``backend_name()``.
"""

from ._backend import backend_name
from .boundary import (
    BoundaryClassifier,
    QuadricParams,
    classify,
    classify_batch,
    hyperplane_init,
    packed_length,
    quadric_eval,
    quadric_eval_batch,
    quadric_grad,
)
from .errors import *  # noqa: F401,F403 -- the exception vocabulary
from .levelset import (
    DEFAULT_Q_GRID,
    LevelSetFamily,
    UncertaintyBracket,
    classifier_monotonicity_violations,
    fit_levelsets,
    local_accuracy,
    local_accuracy_bracket,
    monotonicity_penalty,
    prevalence_function_oracle,
    prevalence_function_query,
    shadow_grid,
)
from .model import (
    LabeledSample,
    TestPopulation,
    TrainingPopulation,
    validate_population,
)
from .objective import (
    ObjectiveConfig,
    empirical_error,
    scale_regularizer,
    smoothed_loss,
    total_loss,
    total_loss_grad,
)
from .optimizer import (
    HomotopyResult,
    MinimizeResult,
    SigmaSchedule,
    fit_boundary,
    homotopy_run,
    minimize,
    sigma_schedule_from_data,
)
from .pipeline import (
    LogShiftTransform,
    ModelFile,
    apply_transform,
    apply_transform_matrix,
    export_boundary_contour,
    fit_transform,
    read_csv,
    read_model,
    write_csv,
    write_model,
)
from .prevalence import (
    IndicatorRates,
    PrevalenceEstimate,
    estimate_prevalence,
    indicator_rates,
    two_pass_classify,
)
from .synth import (
    ConvergenceReport,
    align_scale,
    analytic_prevalence_function,
    convergence_study,
    parabolic_population,
    parabolic_test_population,
    sample_parabolic,
    true_boundary,
)

__version__ = "0.1.0"

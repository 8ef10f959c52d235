"""Explainable cognitive-diagnosis workbench.

Train a per-KC mastery model on class response data, diagnose individual
students against it, explain diagnoses contrastively and counterfactually,
and compute the classroom analytics teachers act on. Exposed as a library,
a CLI (``cdw``), and an HTTP service; a browser UI consumes the service.
"""

from .analytics import (
    AnalyticsBundle,
    ClassComparison,
    CompareThresholds,
    ItemStats,
    KCStats,
    Suggestion,
    compare,
    compute_bundle,
    error_patterns,
    item_stats,
    kc_stats,
    overview,
    suggest,
)
from .errors import DomainError, ParseError, WorkbenchError
from .explain import (
    ContrastiveQuery,
    ContrastiveResult,
    CounterfactualQuery,
    CounterfactualResult,
    ReasoningChain,
    build_reasoning_chain,
    contrastive,
    counterfactual,
)
from .ingest import (
    EncodedDataset,
    QMatrix,
    ResponseRecord,
    ValidationReport,
    encode,
    load_dataset,
    parse_items,
    parse_qmatrix,
    parse_responses,
    qmatrix_csv,
    responses_csv,
)
from .model import (
    FORMAT_VERSION,
    ForwardTrace,
    HyperParams,
    ModelParams,
    item_factors,
    load_model,
    params_equal,
    predict,
    predict_batch,
    project_nonnegative,
    save_model,
    sigmoid,
    student_factor,
)
from .posterior import PosteriorConfig, PosteriorState, diagnose
from .synth import (
    GroundTruth,
    RecoveryMetrics,
    SynthConfig,
    generate,
    recovery_metrics,
    response_probabilities,
)
from .train import TrainConfig, TrainReport, fit, gradients, loss

__version__ = "0.1.0"

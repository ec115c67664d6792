"""Information-theoretic decomposition of predictive uncertainty over
posterior ensembles of categorical predictive distributions."""

from .types import PosteriorEnsemble, ProbabilityVector, UncertaintyTriple, View
from .measures import (
    bma,
    cross_entropy,
    decompose,
    entropy,
    expected_entropy,
    expected_pairwise_kl,
    kl_divergence,
    model_conditional_uncertainty,
    mutual_information,
    reverse_mutual_information,
)
from .estimator import (
    EnsembleBatch,
    MeasureTable,
    UncertaintyScores,
    clamp,
    convergence_report,
    score_batch,
)
from .evaluation import (
    DetectionReport,
    ScoredRecord,
    ScoredSet,
    SelectiveRecord,
    SelectiveSet,
    SplitSpec,
    auroc,
    misclassification_labels,
    run_detection,
    selective_prediction_auc,
)
from .synthetic import generate_synthetic

__all__ = [
    "PosteriorEnsemble",
    "ProbabilityVector",
    "UncertaintyTriple",
    "View",
    "entropy",
    "kl_divergence",
    "cross_entropy",
    "bma",
    "expected_entropy",
    "mutual_information",
    "expected_pairwise_kl",
    "reverse_mutual_information",
    "decompose",
    "model_conditional_uncertainty",
    "EnsembleBatch",
    "MeasureTable",
    "UncertaintyScores",
    "clamp",
    "convergence_report",
    "score_batch",
    "auroc",
    "selective_prediction_auc",
    "misclassification_labels",
    "run_detection",
    "ScoredRecord",
    "ScoredSet",
    "SelectiveRecord",
    "SelectiveSet",
    "SplitSpec",
    "DetectionReport",
    "generate_synthetic",
]

__version__ = "0.1.0"

"""Dynamic logistic ensembles: a binary tree of logistic-regression units.

Interior nodes route softly between their two subtrees, leaves classify.
The probability of a label is evaluated by a recursive fold over the tree
and trained with closed-form gradients.
"""
from .data import Dataset, DataError, StandardizationParams, bundled_path, prepare
from .gradient import batch_gradient, cost, finite_difference_gradient, log_likelihood, point_gradient
from .metrics import MetricsReport, RocCurve, classify, confusion_and_rates, evaluate_scores, roc_auc
from .model import (
    ActivationCache,
    EnsembleModel,
    InvalidArgumentError,
    all_activations,
    batch_activations,
    node_activation,
    sigmoid,
)
from .probability import (
    class1_probability,
    label_probability,
    leaf_term,
    mixture_oracle,
    path_probability,
    predict_proba,
    subtree_label_probability,
)
from .trainer import DivergenceError, TrainConfig, TrainResult, init_model, train

__version__ = "0.1.0"

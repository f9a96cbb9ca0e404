"""Signature isolation forests for functional anomaly detection."""

from .datagen import SynthSpec, generate, make_spec
from .dictionary import DictionaryConfig, DictionaryKind
from .forest import Criterion, Forest, ForestConfig, avg_unsuccessful_bst_path, fit, path_length, score, score_all
from .metrics import ScoreReport, aupr, auroc, fpr_at_95tpr, kendall_tau
from .path import FunctionalDataset, FunctionalPath, Window, from_observations, restrict, time_augment
from .sigcore import (
    SignatureVector,
    chen_concat,
    coordinate_signature,
    segment_signature,
    signature_kernel,
    truncated_signature,
)

__version__ = "0.1.0"

__all__ = [
    "Criterion",
    "DictionaryConfig",
    "DictionaryKind",
    "Forest",
    "ForestConfig",
    "FunctionalDataset",
    "FunctionalPath",
    "ScoreReport",
    "SignatureVector",
    "SynthSpec",
    "Window",
    "aupr",
    "auroc",
    "avg_unsuccessful_bst_path",
    "chen_concat",
    "coordinate_signature",
    "fit",
    "fpr_at_95tpr",
    "from_observations",
    "generate",
    "kendall_tau",
    "make_spec",
    "path_length",
    "restrict",
    "score",
    "score_all",
    "segment_signature",
    "signature_kernel",
    "time_augment",
    "truncated_signature",
]

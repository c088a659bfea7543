"""Gradient-free interpretable metric learning on precomputed backbone features.

Three stages: an unsupervised encoding language (PCA alphabet + k-means
vocabulary distances), a supervised concept dictionary (discriminant
projection with per-class covariance metrics), and per-class Mahalanobis
kNN inference with exportable neighbor evidence. An evaluation harness
provides layer/hyperparameter sweeps, few-shot curves, and metrics, all
exposed through an HTTP service plus a thin-client CLI.
"""

from .concepts import (
    ConceptDictionary,
    ScatterPair,
    compute_scatter,
    fit_dictionary,
    load_dictionary,
    project,
    save_dictionary,
)
from .encoder import (
    EncodingLanguage,
    FullEncoding,
    encode,
    encode_batch,
    fit_language,
    load_language,
    save_language,
)
from .feature_store import (
    DatasetSplit,
    FeatureSet,
    read_features,
    subsample_per_class,
    write_features,
)
from .fewshot import FewShotConfig, FewShotReport, run_fewshot
from .inference import (
    NeighborEvidence,
    Prediction,
    classify,
    classify_batch,
    export_evidence,
    mahalanobis,
)
from .linalg import (
    EigenDecomposition,
    PcaModel,
    cholesky_inverse,
    covariance,
    eig_generalized,
    eig_symmetric,
    fit_pca,
)
from .metrics import MetricsReport, accuracy, evaluate, macro_auc
from .sweep import LayerFiles, SweepConfig, SweepReport, run_sweep
from .vocab import CentroidSet, assign, fit_kmeans

__version__ = "0.1.0"

__all__ = [
    "CentroidSet",
    "ConceptDictionary",
    "DatasetSplit",
    "EigenDecomposition",
    "EncodingLanguage",
    "FeatureSet",
    "FewShotConfig",
    "FewShotReport",
    "FullEncoding",
    "LayerFiles",
    "MetricsReport",
    "NeighborEvidence",
    "PcaModel",
    "Prediction",
    "ScatterPair",
    "SweepConfig",
    "SweepReport",
    "accuracy",
    "assign",
    "cholesky_inverse",
    "classify",
    "classify_batch",
    "compute_scatter",
    "covariance",
    "eig_generalized",
    "eig_symmetric",
    "encode",
    "encode_batch",
    "evaluate",
    "export_evidence",
    "fit_dictionary",
    "fit_kmeans",
    "fit_language",
    "fit_pca",
    "load_dictionary",
    "load_language",
    "macro_auc",
    "mahalanobis",
    "project",
    "read_features",
    "run_fewshot",
    "run_sweep",
    "save_dictionary",
    "save_language",
    "subsample_per_class",
    "write_features",
]

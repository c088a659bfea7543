"""Pydantic request/response models for the HTTP service.

All heavy artifacts (feature files, languages, dictionaries, reports)
live on disk; requests carry paths plus the knobs for each operation, and
responses carry summaries and inline results small enough for JSON.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    type: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class HealthResponse(BaseModel):
    status: str
    version: str


class InspectRequest(BaseModel):
    path: str


class InspectResponse(BaseModel):
    kind: str  # "features" | "language" | "dictionary"
    summary: dict


class FitLanguageRequest(BaseModel):
    features_path: str
    output_path: str
    alphabet_size: int = Field(ge=1)
    vocab_size: int = Field(ge=1)
    seed: int = 0
    sample_cap: int | None = Field(default=None, ge=1)
    whiten: bool = False


class FitLanguageResponse(BaseModel):
    output_path: str
    alphabet_size: int
    vocab_size: int
    feature_dim: int
    layer_index: int
    encoded_dim: int
    samples_used: int
    kmeans_inertia: float
    kmeans_iterations: int
    fingerprint: str


class FitDictionaryRequest(BaseModel):
    features_path: str
    language_path: str
    output_path: str
    ridge: float = Field(default=1e-6, ge=0)
    shrinkage: float = Field(default=1e-4, ge=0)
    rank: int | None = Field(default=None, ge=1)
    classical_scatter: bool = False
    cap_per_class: int | None = Field(default=None, ge=1)
    seed: int = 0


class FitDictionaryResponse(BaseModel):
    output_path: str
    rank: int
    num_classes: int
    num_exemplars: int
    class_counts: list[int]
    fingerprint: str


class NeighborModel(BaseModel):
    exemplar_index: int
    exemplar_label: int
    distance: float
    normalized_distance: float


class PredictionModel(BaseModel):
    label: int
    class_scores: list[float]
    neighbors: list[NeighborModel]


class ClassifyRequest(BaseModel):
    language_path: str
    dictionary_path: str
    features_path: str
    k: int = Field(default=15, ge=1)
    score_mode: str = "inverse_distance"
    output_path: str | None = None


class ClassifyResponse(BaseModel):
    predictions: list[PredictionModel]
    output_path: str | None = None


class EvidenceRequest(BaseModel):
    language_path: str
    dictionary_path: str
    features_path: str
    row_index: int = Field(default=0, ge=0)
    k: int = Field(default=10, ge=1)
    output_path: str | None = None


class EvidenceResponse(BaseModel):
    evidence: dict
    output_path: str | None = None


class MetricsRequest(BaseModel):
    predictions_path: str
    truth_features_path: str
    output_path: str | None = None


class MetricsResponse(BaseModel):
    accuracy: float
    macro_auc: float | None
    per_class_accuracy: list[float | None]
    confusion: list[list[int]]
    auc_skipped_classes: list[int]
    config: dict
    output_path: str | None = None


class SweepRequest(BaseModel):
    config_path: str
    output_dir: str
    workers: int = Field(default=1, ge=1)


class SweepResponse(BaseModel):
    report: dict
    files: dict[str, str]


class FewShotRequest(BaseModel):
    config_path: str
    output_dir: str


class FewShotResponse(BaseModel):
    report: dict
    files: dict[str, str]


class PresetModel(BaseModel):
    dataset: str
    layer: int
    alphabet_size: int
    vocab_size: int
    k: int
    cap_per_class: int


class PresetsResponse(BaseModel):
    presets: list[PresetModel]

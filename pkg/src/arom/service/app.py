"""FastAPI application wrapping the core pipeline.

Stateless by design: each request loads its artifacts from the paths it
names, so the service can serve any number of languages/dictionaries
concurrently and restarts lose nothing. Library errors map to structured
400/404 responses with the exception class name as the error type.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..concepts import (
    deserialize_dictionary,
    fit_dictionary,
    load_dictionary,
    project,
    save_dictionary,
)
from ..config import load_fewshot_config, load_sweep_config
from ..encoder import (
    deserialize_language,
    encode_batch,
    fit_language,
    load_language,
    save_language,
)
from ..errors import AromError, ConfigError
from ..feature_store import read_features, sample_rows, subsample_per_class
from ..fewshot import run_fewshot, write_fewshot_reports
from ..inference import (
    Prediction,
    classify_batch,
    classify_projected,
    export_evidence,
)
from ..metrics import evaluate
from ..presets import PRESETS
from ..sweep import run_sweep, write_sweep_reports
from . import schemas


def _prediction_model(prediction: Prediction) -> schemas.PredictionModel:
    return schemas.PredictionModel(
        label=prediction.label,
        class_scores=[float(s) for s in prediction.class_scores],
        neighbors=[
            schemas.NeighborModel(
                exemplar_index=n.exemplar_index,
                exemplar_label=n.exemplar_label,
                distance=n.distance,
                normalized_distance=n.normalized_distance,
            )
            for n in prediction.neighbors
        ],
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="arom",
        version=__version__,
        description=(
            "Encoding-language fitting, concept-dictionary synthesis, "
            "nearest-exemplar classification with evidence export, and the "
            "sweep/few-shot evaluation harness."
        ),
    )

    @app.exception_handler(AromError)
    async def arom_error_handler(request: Request, exc: AromError):
        return JSONResponse(
            status_code=400,
            content={"error": {"type": type(exc).__name__, "message": str(exc)}},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file_handler(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=404,
            content={"error": {"type": "FileNotFoundError", "message": str(exc)}},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=schemas.PresetsResponse)
    def presets() -> schemas.PresetsResponse:
        return schemas.PresetsResponse(
            presets=[
                schemas.PresetModel(
                    dataset=p.dataset,
                    layer=p.layer,
                    alphabet_size=p.alphabet_size,
                    vocab_size=p.vocab_size,
                    k=p.k,
                    cap_per_class=p.cap_per_class,
                )
                for p in PRESETS.values()
            ]
        )

    @app.post("/inspect", response_model=schemas.InspectResponse)
    def inspect(request: schemas.InspectRequest) -> schemas.InspectResponse:
        path = Path(request.path)
        if not path.exists():
            raise FileNotFoundError(str(path))
        magic = path.open("rb").read(4)
        if magic == b"AROM":
            fs = read_features(path)
            return schemas.InspectResponse(
                kind="features",
                summary={
                    "num_samples": fs.num_samples,
                    "feature_dim": fs.feature_dim,
                    "layer_index": fs.layer_index,
                    "patch_count": fs.patch_count,
                    "backbone_id": fs.backbone_id,
                    "source_dataset": fs.source_dataset,
                    "labeled": fs.labeled,
                    "label_count": 0 if fs.labels is None else int(fs.labels.size),
                    "num_classes": (
                        0 if fs.labels is None else int(fs.labels.max()) + 1
                    ),
                },
            )
        if magic == b"ARLG":
            lang = deserialize_language(path.read_bytes())
            return schemas.InspectResponse(
                kind="language",
                summary={
                    "alphabet_size": lang.alphabet_size,
                    "vocab_size": lang.vocab_size,
                    "feature_dim": lang.feature_dim,
                    "layer_index": lang.layer_index,
                    "encoded_dim": lang.encoded_dim,
                    "fingerprint": lang.fingerprint(),
                },
            )
        if magic == b"ARDC":
            dictionary = deserialize_dictionary(path.read_bytes())
            return schemas.InspectResponse(
                kind="dictionary",
                summary={
                    "input_dim": dictionary.input_dim,
                    "rank": dictionary.rank,
                    "num_classes": dictionary.num_classes,
                    "num_exemplars": dictionary.num_exemplars,
                    "class_counts": dictionary.class_counts.tolist(),
                    "fingerprint": dictionary.language_fingerprint,
                },
            )
        raise ConfigError(f"{path}: unrecognized container magic {magic!r}")

    @app.post("/language/fit", response_model=schemas.FitLanguageResponse)
    def language_fit(request: schemas.FitLanguageRequest) -> schemas.FitLanguageResponse:
        features = read_features(request.features_path)
        rows = sample_rows(features.num_samples, request.sample_cap, request.seed)
        unlabeled = features.select(rows).without_labels()
        language = fit_language(
            unlabeled,
            request.alphabet_size,
            request.vocab_size,
            request.seed,
            whiten=request.whiten,
        )
        save_language(language, request.output_path)
        return schemas.FitLanguageResponse(
            output_path=request.output_path,
            alphabet_size=language.alphabet_size,
            vocab_size=language.vocab_size,
            feature_dim=language.feature_dim,
            layer_index=language.layer_index,
            encoded_dim=language.encoded_dim,
            samples_used=unlabeled.num_samples,
            kmeans_inertia=language.vocabulary.inertia,
            kmeans_iterations=language.vocabulary.iterations_run,
            fingerprint=language.fingerprint(),
        )

    @app.post("/dictionary/fit", response_model=schemas.FitDictionaryResponse)
    def dictionary_fit(
        request: schemas.FitDictionaryRequest,
    ) -> schemas.FitDictionaryResponse:
        language = load_language(request.language_path)
        features = read_features(request.features_path)
        if request.cap_per_class is not None:
            features = subsample_per_class(
                features, request.cap_per_class, request.seed
            )
        encodings, labels = encode_batch(language, features)
        dictionary = fit_dictionary(
            encodings,
            labels,
            ridge=request.ridge,
            rank=request.rank,
            shrinkage=request.shrinkage,
            classical_scatter=request.classical_scatter,
            language_fingerprint=language.fingerprint(),
        )
        save_dictionary(dictionary, request.output_path)
        return schemas.FitDictionaryResponse(
            output_path=request.output_path,
            rank=dictionary.rank,
            num_classes=dictionary.num_classes,
            num_exemplars=dictionary.num_exemplars,
            class_counts=dictionary.class_counts.tolist(),
            fingerprint=dictionary.language_fingerprint,
        )

    @app.post("/classify", response_model=schemas.ClassifyResponse)
    def classify_endpoint(request: schemas.ClassifyRequest) -> schemas.ClassifyResponse:
        language = load_language(request.language_path)
        dictionary = load_dictionary(request.dictionary_path)
        features = read_features(request.features_path)
        predictions = classify_batch(
            language, dictionary, features, request.k, score_mode=request.score_mode
        )
        models = [_prediction_model(p) for p in predictions]
        output_path = None
        if request.output_path:
            output_path = request.output_path
            Path(output_path).write_text(
                json.dumps(
                    {
                        "predictions": [m.model_dump() for m in models],
                        "k": request.k,
                        "score_mode": request.score_mode,
                    },
                    indent=2,
                )
            )
        return schemas.ClassifyResponse(predictions=models, output_path=output_path)

    @app.post("/evidence", response_model=schemas.EvidenceResponse)
    def evidence_endpoint(request: schemas.EvidenceRequest) -> schemas.EvidenceResponse:
        language = load_language(request.language_path)
        dictionary = load_dictionary(request.dictionary_path)
        features = read_features(request.features_path)
        if request.row_index >= features.num_samples:
            raise ConfigError(
                f"row_index {request.row_index} out of range "
                f"[0, {features.num_samples})"
            )
        row = features.select(np.array([request.row_index]))
        encodings, _ = encode_batch(language, row)
        s_proj = project(dictionary, encodings[0])
        prediction = classify_projected(dictionary, s_proj, request.k)
        record = export_evidence(prediction, dictionary, s_proj)
        output_path = None
        if request.output_path:
            output_path = request.output_path
            Path(output_path).write_text(json.dumps(record, indent=2))
        return schemas.EvidenceResponse(evidence=record, output_path=output_path)

    @app.post("/metrics", response_model=schemas.MetricsResponse)
    def metrics_endpoint(request: schemas.MetricsRequest) -> schemas.MetricsResponse:
        predictions_path = Path(request.predictions_path)
        if not predictions_path.exists():
            raise FileNotFoundError(str(predictions_path))
        payload = json.loads(predictions_path.read_text())
        predictions = payload["predictions"]
        truth_set = read_features(request.truth_features_path)
        if truth_set.labels is None:
            raise ConfigError("truth feature file carries no labels")
        if len(predictions) != truth_set.num_samples:
            raise ConfigError(
                f"{len(predictions)} predictions vs {truth_set.num_samples} truth rows"
            )
        predicted = np.array([p["label"] for p in predictions])
        scores = np.array([p["class_scores"] for p in predictions])
        num_classes = max(scores.shape[1], int(truth_set.labels.max()) + 1)
        if scores.shape[1] < num_classes:
            scores = np.pad(scores, ((0, 0), (0, num_classes - scores.shape[1])))
        report = evaluate(
            predicted,
            truth_set.labels,
            num_classes,
            class_scores=scores,
            config={"k": payload.get("k"), "score_mode": payload.get("score_mode")},
        )
        body = schemas.MetricsResponse(
            accuracy=report.accuracy,
            macro_auc=report.macro_auc,
            per_class_accuracy=[
                None if np.isnan(v) else float(v) for v in report.per_class_accuracy
            ],
            confusion=report.confusion.tolist(),
            auc_skipped_classes=list(report.auc_skipped_classes),
            config=report.config,
            output_path=request.output_path,
        )
        if request.output_path:
            Path(request.output_path).write_text(
                json.dumps(body.model_dump(exclude={"output_path"}), indent=2)
            )
        return body

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep_endpoint(request: schemas.SweepRequest) -> schemas.SweepResponse:
        cfg, layer_files, echo = load_sweep_config(request.config_path)
        report = run_sweep(layer_files, cfg, workers=request.workers)
        report.config = {"file_echo": echo, **report.config}
        files = write_sweep_reports(report, request.output_dir)
        return schemas.SweepResponse(report=report.to_dict(), files=files)

    @app.post("/fewshot", response_model=schemas.FewShotResponse)
    def fewshot_endpoint(request: schemas.FewShotRequest) -> schemas.FewShotResponse:
        cfg, paths, echo = load_fewshot_config(request.config_path)
        train = read_features(paths["train"])
        test = read_features(paths["test"])
        language = load_language(paths["language"])
        report = run_fewshot(train, test, language, cfg)
        report.config = {"file_echo": echo, **report.config}
        files = write_fewshot_reports(report, request.output_dir)
        return schemas.FewShotResponse(report=report.to_dict(), files=files)

    return app

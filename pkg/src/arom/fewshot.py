"""Few-shot label-efficiency protocol.

The encoding language stays fixed; the dictionary is refit from n
randomly drawn labeled samples per class (n swept over ``shots``, one
seeded draw per repeat) and each fit is scored on the full test split.
The retention rate divides mean accuracy at the largest shot by the
full-data reference accuracy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .concepts import fit_dictionary
from .encoder import EncodingLanguage, encode_batch
from .errors import ConfigError, UnlabeledDataError
from .feature_store import FeatureSet, subsample_indices_per_class
from .inference import classify
from .metrics import accuracy

RECORDS_CSV_COLUMNS = ("shot", "seed", "accuracy")
SUMMARY_CSV_COLUMNS = (
    "shot",
    "mean_accuracy",
    "min_accuracy",
    "max_accuracy",
    "retention",
)


@dataclass(frozen=True)
class FewShotConfig:
    shots: tuple[int, ...]
    repeats: int
    k: int = 15
    seeds: tuple[int, ...] = ()
    ridge: float = 1e-6
    shrinkage: float = 1e-4

    def __post_init__(self) -> None:
        if not self.shots:
            raise ConfigError("shots must be non-empty")
        if any(s < 2 for s in self.shots):
            raise ConfigError(
                "every shot must be >= 2: per-class covariance needs n_c >= 2"
            )
        if list(self.shots) != sorted(self.shots):
            raise ConfigError("shots must be ascending")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not self.seeds:
            object.__setattr__(self, "seeds", tuple(range(self.repeats)))
        elif len(self.seeds) != self.repeats:
            raise ConfigError(
                f"seeds has length {len(self.seeds)}, must match repeats {self.repeats}"
            )

    def to_dict(self) -> dict:
        return {
            "shots": list(self.shots),
            "repeats": self.repeats,
            "k": self.k,
            "seeds": list(self.seeds),
            "ridge": self.ridge,
            "shrinkage": self.shrinkage,
        }


@dataclass(frozen=True)
class FewShotRecord:
    shot: int
    seed: int
    accuracy: float


@dataclass
class FewShotReport:
    config: dict
    records: list[FewShotRecord]
    shot_mean: dict[int, float]
    shot_min: dict[int, float]
    shot_max: dict[int, float]
    reference_accuracy: float
    retention: float

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "records": [
                {"shot": r.shot, "seed": r.seed, "accuracy": r.accuracy}
                for r in self.records
            ],
            "per_shot": {
                str(shot): {
                    "mean_accuracy": self.shot_mean[shot],
                    "min_accuracy": self.shot_min[shot],
                    "max_accuracy": self.shot_max[shot],
                }
                for shot in sorted(self.shot_mean)
            },
            "reference_accuracy": self.reference_accuracy,
            "retention": self.retention,
        }


def _evaluate_dictionary(
    encodings: np.ndarray,
    labels: np.ndarray,
    test_encodings: np.ndarray,
    test_labels: np.ndarray,
    cfg: FewShotConfig,
    fingerprint: str,
) -> float:
    dictionary = fit_dictionary(
        encodings,
        labels,
        ridge=cfg.ridge,
        shrinkage=cfg.shrinkage,
        language_fingerprint=fingerprint,
    )
    predicted = np.array(
        [
            classify(dictionary, test_encodings[i], cfg.k).label
            for i in range(test_encodings.shape[0])
        ]
    )
    return accuracy(predicted, test_labels)


def run_fewshot(
    train: FeatureSet,
    test: FeatureSet,
    language: EncodingLanguage,
    cfg: FewShotConfig,
) -> FewShotReport:
    """Sweep dictionary sizes with a fixed language; score on the full test set."""
    if train.labels is None or test.labels is None:
        raise UnlabeledDataError("few-shot protocol needs labeled train and test sets")

    train_encodings, train_labels = encode_batch(language, train)
    test_encodings, test_labels = encode_batch(language, test)
    fingerprint = language.fingerprint()

    reference_accuracy = _evaluate_dictionary(
        train_encodings, train_labels, test_encodings, test_labels, cfg, fingerprint
    )

    records: list[FewShotRecord] = []
    for shot in cfg.shots:
        for seed in cfg.seeds:
            idx = subsample_indices_per_class(train_labels, shot, seed)
            records.append(
                FewShotRecord(
                    shot=shot,
                    seed=seed,
                    accuracy=_evaluate_dictionary(
                        train_encodings[idx],
                        train_labels[idx],
                        test_encodings,
                        test_labels,
                        cfg,
                        fingerprint,
                    ),
                )
            )

    shot_mean = {
        shot: float(np.mean([r.accuracy for r in records if r.shot == shot]))
        for shot in cfg.shots
    }
    shot_min = {
        shot: float(np.min([r.accuracy for r in records if r.shot == shot]))
        for shot in cfg.shots
    }
    shot_max = {
        shot: float(np.max([r.accuracy for r in records if r.shot == shot]))
        for shot in cfg.shots
    }
    max_shot = max(cfg.shots)
    retention = (
        shot_mean[max_shot] / reference_accuracy if reference_accuracy > 0 else 0.0
    )
    return FewShotReport(
        config=cfg.to_dict(),
        records=records,
        shot_mean=shot_mean,
        shot_min=shot_min,
        shot_max=shot_max,
        reference_accuracy=reference_accuracy,
        retention=retention,
    )


def write_fewshot_reports(report: FewShotReport, out_dir: str | Path) -> dict[str, str]:
    """Write per-repeat records CSV, per-shot summary CSV, and JSON report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / "fewshot_records.csv"
    with records_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RECORDS_CSV_COLUMNS)
        for record in report.records:
            writer.writerow([str(record.shot), str(record.seed), repr(record.accuracy)])
    summary_path = out / "fewshot_summary.csv"
    max_shot = max(report.shot_mean)
    with summary_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_CSV_COLUMNS)
        for shot in sorted(report.shot_mean):
            writer.writerow(
                [
                    str(shot),
                    repr(report.shot_mean[shot]),
                    repr(report.shot_min[shot]),
                    repr(report.shot_max[shot]),
                    repr(report.retention) if shot == max_shot else "",
                ]
            )
    json_path = out / "fewshot_report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return {
        "records_csv": str(records_path),
        "summary_csv": str(summary_path),
        "report_json": str(json_path),
    }

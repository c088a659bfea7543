import numpy as np
import pytest

from arom.concepts import fit_dictionary
from arom.encoder import encode_batch, fit_language
from arom.errors import ConfigError
from arom.feature_store import read_features, sample_rows, subsample_per_class
from arom.inference import classify
from arom.metrics import accuracy
from arom.sweep import (
    LayerFiles,
    SweepConfig,
    run_sweep,
    write_sweep_reports,
    _cell_seeds,
)

from conftest import gaussian_blob_set
from arom.feature_store import write_features


def small_config(**overrides):
    base = dict(
        layer_indices=(0,),
        alphabet_sizes=(6,),
        vocab_sizes=(4,),
        k=3,
        language_sample_cap=200,
        dict_cap_per_class=40,
        eval_cap=60,
        seed=7,
    )
    base.update(overrides)
    return SweepConfig(**base)


class TestConfig:
    def test_rejects_empty_grid(self):
        with pytest.raises(ConfigError):
            small_config(alphabet_sizes=())

    def test_rejects_bad_caps(self):
        with pytest.raises(ConfigError):
            small_config(eval_cap=0)


class TestRunSweep:
    def test_single_cell_equals_direct_run(self, blob_files):
        cfg = small_config()
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        report = run_sweep(layer_files, cfg)
        assert len(report.cells) == 1
        cell = report.cells[0]
        assert cell.ok

        # replicate the cell by hand with the same derived seeds
        train = read_features(blob_files["train"])
        val = read_features(blob_files["val"])
        lang_seed, kmeans_seed, dict_seed, eval_seed = _cell_seeds(7, 0, 6, 4)
        lang_rows = sample_rows(train.num_samples, cfg.language_sample_cap, lang_seed)
        language = fit_language(
            train.select(lang_rows).without_labels(), 6, 4, kmeans_seed
        )
        dict_set = subsample_per_class(train, cfg.dict_cap_per_class, dict_seed)
        encodings, labels = encode_batch(language, dict_set)
        dictionary = fit_dictionary(encodings, labels)
        eval_set = val.select(sample_rows(val.num_samples, cfg.eval_cap, eval_seed))
        eval_encodings, _ = encode_batch(language, eval_set)
        predicted = np.array(
            [classify(dictionary, e, cfg.k).label for e in eval_encodings]
        )
        assert cell.accuracy == pytest.approx(accuracy(predicted, eval_set.labels))

    def test_identical_layers_agree(self, tmp_path):
        # same data registered as two layers: best cells should agree within
        # subsampling noise
        paths = {}
        for layer in (0, 1):
            for split, seed, n in (("train", 1, 120), ("val", 2, 60)):
                fs = gaussian_blob_set(seed, n_per_class=n, layer_index=layer)
                path = tmp_path / f"b_{split}_L{layer}.arom"
                write_features(fs, path)
                paths[(split, layer)] = path
        cfg = small_config(layer_indices=(0, 1))
        layer_files = {
            layer: LayerFiles(
                train=paths[("train", layer)], val=paths[("val", layer)]
            )
            for layer in (0, 1)
        }
        report = run_sweep(layer_files, cfg)
        best = report.best_per_layer
        assert abs(best[0].accuracy - best[1].accuracy) <= 0.02

    def test_grid_shape_matches_protocol(self, blob_files):
        cfg = small_config(
            alphabet_sizes=(4, 6, 8), vocab_sizes=(2, 4, 8), layer_indices=(0,)
        )
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        report = run_sweep(layer_files, cfg)
        assert len(report.cells) == 9  # |layers| x 9 cells

    def test_cell_error_recorded_and_sweep_continues(self, blob_files):
        # alphabet size 999 exceeds feature_dim 16: that cell errors, other
        # cells still succeed
        cfg = small_config(alphabet_sizes=(6, 999))
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        report = run_sweep(layer_files, cfg)
        statuses = {(c.alphabet_size, c.ok) for c in report.cells}
        assert (6, True) in statuses
        assert (999, False) in statuses
        failing = [c for c in report.cells if not c.ok][0]
        assert "DegenerateInputError" in failing.error

    def test_missing_layer_file_rejected(self, tmp_path, blob_files):
        cfg = small_config()
        layer_files = {
            0: LayerFiles(train=blob_files["train"], val=tmp_path / "absent.arom")
        }
        with pytest.raises(ConfigError):
            run_sweep(layer_files, cfg)

    def test_unconfigured_layer_rejected(self, blob_files):
        cfg = small_config(layer_indices=(0, 5))
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        with pytest.raises(ConfigError):
            run_sweep(layer_files, cfg)

    def test_layer_metadata_mismatch_rejected(self, tmp_path, blob_files):
        # file claims layer 3 but is registered as layer 0
        fs = gaussian_blob_set(4, n_per_class=30, layer_index=3)
        wrong = tmp_path / "wrong.arom"
        write_features(fs, wrong)
        cfg = small_config()
        layer_files = {0: LayerFiles(train=blob_files["train"], val=wrong)}
        with pytest.raises(ConfigError, match="layer_index"):
            run_sweep(layer_files, cfg)

    def test_parallel_matches_serial(self, blob_files):
        cfg = small_config(alphabet_sizes=(4, 6), vocab_sizes=(2, 4))
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        serial = run_sweep(layer_files, cfg, workers=1)
        parallel = run_sweep(layer_files, cfg, workers=4)
        assert [c.accuracy for c in serial.cells] == [
            c.accuracy for c in parallel.cells
        ]


class TestReports:
    def test_csv_byte_identical_across_runs(self, blob_files, tmp_path):
        cfg = small_config(alphabet_sizes=(4, 6), vocab_sizes=(2, 4))
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        paths_a = write_sweep_reports(run_sweep(layer_files, cfg), out_a)
        paths_b = write_sweep_reports(run_sweep(layer_files, cfg), out_b)
        for key in ("grid_csv", "best_csv", "report_json"):
            with open(paths_a[key], "rb") as fa, open(paths_b[key], "rb") as fb:
                assert fa.read() == fb.read()

    def test_grid_csv_columns(self, blob_files, tmp_path):
        cfg = small_config()
        layer_files = {0: LayerFiles(train=blob_files["train"], val=blob_files["val"])}
        paths = write_sweep_reports(run_sweep(layer_files, cfg), tmp_path)
        header = open(paths["grid_csv"]).readline().strip().split(",")
        assert header == [
            "layer",
            "alphabet_size",
            "vocab_size",
            "k",
            "n_language",
            "n_dictionary",
            "n_eval",
            "accuracy",
            "status",
            "error",
        ]
        report_json = open(paths["report_json"]).read()
        assert '"config"' in report_json  # config echoed into the report

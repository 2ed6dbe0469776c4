"""End-to-end orchestration: ingest, preprocess, split, train, tune, report.

A run is driven by one :class:`RunConfig` (optionally parsed from a
``key = value`` file). All output files are written to a staging directory
first and moved into place together, so a crashed run never leaves a partial
result set. Any failure is re-raised with the pipeline stage that caused it.
"""

from __future__ import annotations

import csv
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from . import dataset, dragonfly, evaluation, imaging, neuralnet, wavelet
from .dataset import DatasetManifest
from .dragonfly import DaConfig
from .evaluation import MetricsReport
from .neuralnet import MlpParams, TrainConfig, TrainReport

log = logging.getLogger(__name__)

INPUT_MODES = ("flat", "features")

FLAT_DIM = wavelet.IMAGE_SIDE * wavelet.IMAGE_SIDE

CHECKPOINT_NAME = "model.wmlp"


class StageError(RuntimeError):
    """A pipeline failure, tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class RunConfig:
    data_root: Path
    output_dir: Path
    input_mode: str = "flat"
    seed: int = 1
    learning_rate: float = 0.01
    batch_size: int = 256
    epochs: int = 100
    hidden_dim: int = 100
    l2: float = 0.0
    early_stop_patience: int | None = None
    split_ratio: float = 0.7
    skip_tuning: bool = True
    tuning_pop: int = 10
    tuning_iters: int = 2
    tuning_epochs: int = 10

    def __post_init__(self) -> None:
        self.data_root = Path(self.data_root)
        self.output_dir = Path(self.output_dir)
        if self.input_mode not in INPUT_MODES:
            raise ValueError(
                f"input_mode must be one of {INPUT_MODES}, got {self.input_mode!r}"
            )
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        for name in ("tuning_pop", "tuning_iters", "tuning_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        # Reuse the trainer's own validation for the shared fields.
        self.train_config()

    def train_config(self, epochs: int | None = None) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs if epochs is None else epochs,
            seed=self.seed,
            l2=self.l2,
            early_stop_patience=self.early_stop_patience,
        )


_BOOL_WORDS = {
    "true": True,
    "yes": True,
    "1": True,
    "false": False,
    "no": False,
    "0": False,
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ValueError(f"config line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _coerce(name: str, kind: type, value: str):
    try:
        if kind is bool:
            word = value.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(f"not a boolean: {value!r}")
            return _BOOL_WORDS[word]
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        return value
    except ValueError as exc:
        raise ValueError(f"config key {name!r}: {exc}") from exc


_FIELD_KINDS: dict[str, type] = {
    "data_root": str,
    "output_dir": str,
    "input_mode": str,
    "seed": int,
    "learning_rate": float,
    "batch_size": int,
    "epochs": int,
    "hidden_dim": int,
    "l2": float,
    "early_stop_patience": int,
    "split_ratio": float,
    "skip_tuning": bool,
    "tuning_pop": int,
    "tuning_iters": int,
    "tuning_epochs": int,
}


def load_config(path: str | Path, **overrides) -> RunConfig:
    """Build a :class:`RunConfig` from a config file plus overrides.

    Unknown keys are an error (they are always typos). ``early_stop_patience``
    accepts ``none`` to mean disabled.
    """
    raw = parse_config_text(Path(path).read_text())
    kwargs: dict = {}
    for key, value in raw.items():
        if key not in _FIELD_KINDS:
            known = ", ".join(sorted(_FIELD_KINDS))
            raise ValueError(f"unknown config key {key!r} (known keys: {known})")
        if key == "early_stop_patience" and value.lower() == "none":
            kwargs[key] = None
        else:
            kwargs[key] = _coerce(key, _FIELD_KINDS[key], value)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"data_root", "output_dir"} - kwargs.keys()
    if missing:
        raise ValueError(f"config is missing required key(s): {sorted(missing)}")
    valid = {f.name for f in fields(RunConfig)}
    assert set(kwargs) <= valid
    return RunConfig(**kwargs)


def preprocess_image(path: str | Path, input_mode: str) -> np.ndarray:
    """Load one image and turn it into a model input vector."""
    img = imaging.load_grayscale(path)
    img = imaging.resize_bilinear(img, wavelet.IMAGE_SIDE, wavelet.IMAGE_SIDE)
    v = imaging.normalize(img)
    if input_mode == "flat":
        return v.ravel()
    if input_mode == "features":
        return wavelet.feature_vector(v)
    raise ValueError(f"unknown input mode {input_mode!r}")


def build_inputs(
    manifest: DatasetManifest, input_mode: str
) -> tuple[np.ndarray, np.ndarray]:
    """Preprocess every manifest entry into an (n, d) matrix plus labels."""
    if len(manifest) == 0:
        raise ValueError(f"dataset at {manifest.root} contains no images")
    rows = [preprocess_image(p, input_mode) for p in manifest.paths]
    return np.stack(rows), manifest.labels.copy()


def evaluate_params(
    params: MlpParams, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, MetricsReport, dict[int, np.ndarray]]:
    """Confusion matrix, metrics (with AUC), and per-class ROC curves."""
    pred, probs = neuralnet.predict(params, x)
    cm = evaluation.confusion_matrix(y, pred, n_classes=params.output_dim)
    metrics = evaluation.classification_metrics(cm)
    curves = {
        c: evaluation.roc_curve(y, probs[:, c], c) for c in range(params.output_dim)
    }
    metrics = metrics.with_auc(
        tuple(evaluation.auc(curves[c]) for c in range(params.output_dim))
    )
    return cm, metrics, curves


@dataclass
class PipelineResult:
    config: RunConfig
    files: dict[str, Path]
    params: MlpParams
    train_report: TrainReport
    confusion: np.ndarray
    metrics: MetricsReport
    tuned: tuple[float, int] | None
    trace: np.ndarray | None


class _LoggingObjective:
    """Tuning objective that remembers every evaluation for the report."""

    def __init__(self, train_xy, val_xy, budget: TrainConfig):
        self.train_xy = train_xy
        self.val_xy = val_xy
        self.budget = budget
        self.evals: list[tuple[float, int, float]] = []

    def __call__(self, candidate: np.ndarray) -> float:
        score = dragonfly.mlp_tuning_objective(
            candidate, self.train_xy, self.val_xy, self.budget
        )
        lr, hidden = dragonfly.decode_candidate(candidate)
        self.evals.append((lr, hidden, score))
        return score


def _write_trace_csv(path: Path, trace: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_fitness"])
        for i, v in enumerate(trace):
            writer.writerow([i, f"{v:.10g}"])


def _write_evals_csv(path: Path, evals: list[tuple[float, int, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eval", "learning_rate", "hidden_dim", "score"])
        for i, (lr, hidden, score) in enumerate(evals):
            writer.writerow([i, f"{lr:.10g}", hidden, f"{score:.10g}"])


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Execute the full classification pipeline described by ``cfg``.

    Stages: ingest, preprocess, split, train, (optional) tune + retrain,
    evaluate, export. Returns the in-memory results plus final file paths.
    """
    with _stage("ingest"):
        manifest = dataset.scan_dataset(cfg.data_root)
        log.info(
            "ingested %d images (%s)",
            len(manifest),
            ", ".join(
                f"{name}={count}"
                for name, count in zip(dataset.CLASS_NAMES, manifest.counts)
            ),
        )

    with _stage("preprocess"):
        x_all, y_all = build_inputs(manifest, cfg.input_mode)
        log.info("preprocessed to a %s matrix (mode=%s)", x_all.shape, cfg.input_mode)

    with _stage("split"):
        split = dataset.split_train_test(y_all, cfg.split_ratio, cfg.seed)
        x_train, y_train = x_all[split.train], y_all[split.train]
        x_test, y_test = x_all[split.test], y_all[split.test]
        log.info("split: %d train / %d test", len(split.train), len(split.test))

    with _stage("train"):
        params0 = neuralnet.init_params(x_all.shape[1], cfg.hidden_dim, cfg.seed)
        report = neuralnet.train(
            params0, x_train, y_train, x_test, y_test, cfg.train_config()
        )
        final_params = report.params
        assert final_params is not None
        log.info("baseline training done: val_acc=%.4f", report.final_val_acc)

    tuned: tuple[float, int] | None = None
    trace: np.ndarray | None = None
    evals: list[tuple[float, int, float]] = []
    if not cfg.skip_tuning:
        with _stage("tune"):
            budget = cfg.train_config(epochs=cfg.tuning_epochs)
            objective = _LoggingObjective(
                (x_train, y_train), (x_test, y_test), budget
            )
            da_cfg = DaConfig.tuning_default(
                seed=cfg.seed, pop=cfg.tuning_pop, max_iter=cfg.tuning_iters
            )
            result = dragonfly.optimize(objective, da_cfg)
            tuned = dragonfly.decode_candidate(result.position)
            trace = result.trace
            evals = objective.evals
            log.info(
                "tuning picked lr=%.6g hidden=%d (score %.6g)",
                tuned[0], tuned[1], result.fitness,
            )
        with _stage("retrain"):
            tc = replace(cfg.train_config(), learning_rate=tuned[0])
            params0 = neuralnet.init_params(x_all.shape[1], tuned[1], cfg.seed)
            report = neuralnet.train(
                params0, x_train, y_train, x_test, y_test, tc
            )
            final_params = report.params
            assert final_params is not None
            log.info("retrained with tuned settings: val_acc=%.4f", report.final_val_acc)

    with _stage("evaluate"):
        cm, metrics, curves = evaluate_params(final_params, x_test, y_test)
        log.info("test accuracy %.4f, macro F1 %.4f",
                 metrics.overall_accuracy, metrics.macro_f1)

    with _stage("export"):
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(
            tempfile.mkdtemp(prefix=".staging-", dir=cfg.output_dir)
        )
        try:
            neuralnet.save_checkpoint(final_params, staging / CHECKPOINT_NAME)
            report.to_csv(staging / "train_report.csv")
            evaluation.export_report(metrics, cm, curves, staging)
            if cfg.input_mode == "features":
                wavelet.export_features_csv(staging / "features.csv", x_all, y_all)
            if trace is not None:
                _write_trace_csv(staging / "trace.csv", trace)
                _write_evals_csv(staging / "tuning_evals.csv", evals)
            files: dict[str, Path] = {}
            for item in sorted(staging.iterdir(), key=lambda p: p.name):
                target = cfg.output_dir / item.name
                os.replace(item, target)
                files[item.name] = target
        except Exception:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        staging.rmdir()

    return PipelineResult(
        config=cfg,
        files=files,
        params=final_params,
        train_report=report,
        confusion=cm,
        metrics=metrics,
        tuned=tuned,
        trace=trace,
    )


def infer_input_mode(params: MlpParams) -> str:
    """Deduce the preprocessing mode a checkpoint was trained with."""
    if params.input_dim == FLAT_DIM:
        return "flat"
    if params.input_dim == wavelet.FEATURE_COUNT:
        return "features"
    raise ValueError(
        f"checkpoint input width {params.input_dim} matches neither "
        f"flat ({FLAT_DIM}) nor features ({wavelet.FEATURE_COUNT})"
    )

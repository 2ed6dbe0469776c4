"""Classifier evaluation: confusion matrix, per-class metrics, ROC curves.

All multi-class metrics reduce to one-vs-rest binary counts first. Zero
denominators score 0 and are flagged rather than raising, so degenerate
predictions still produce a complete report.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

N_CLASSES = 3


class BinaryCounts(NamedTuple):
    tp: int
    tn: int
    fp: int
    fn: int


@dataclass(frozen=True)
class MetricsReport:
    per_class_accuracy: tuple[float, ...]
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    overall_accuracy: float
    zero_division_flags: tuple[str, ...]
    per_class_auc: tuple[float, ...] | None = None

    def with_auc(self, aucs: tuple[float, ...]) -> "MetricsReport":
        if len(aucs) != len(self.per_class_accuracy):
            raise ValueError("one AUC per class required")
        return replace(self, per_class_auc=tuple(float(a) for a in aucs))


def confusion_matrix(
    y_true: np.ndarray, y_pred: np.ndarray, n_classes: int = N_CLASSES
) -> np.ndarray:
    """Counts with true labels on rows, predictions on columns."""
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError(
            f"label arrays disagree: {y_true.shape} vs {y_pred.shape}"
        )
    if y_true.size == 0:
        raise ValueError("cannot build a confusion matrix from zero samples")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(f"{name} contains labels outside [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true.astype(np.int64), y_pred.astype(np.int64)), 1)
    return cm


def binary_reduce(cm: np.ndarray, cls: int) -> BinaryCounts:
    """One-vs-rest counts for ``cls`` from a multi-class confusion matrix."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got {cm.shape}")
    if not 0 <= cls < cm.shape[0]:
        raise ValueError(f"class {cls} out of range for a {cm.shape[0]}-class matrix")
    tp = int(cm[cls, cls])
    fn = int(cm[cls].sum() - tp)
    fp = int(cm[:, cls].sum() - tp)
    tn = int(cm.sum() - tp - fn - fp)
    return BinaryCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def _safe_div(num: float, den: float, flag: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def classification_metrics(cm: np.ndarray) -> MetricsReport:
    """Per-class accuracy/precision/recall/F1 from one-vs-rest counts, their
    unweighted macro averages, and the overall accuracy."""
    cm = np.asarray(cm)
    n_classes = cm.shape[0]
    flags: list[str] = []
    acc, prec, rec, f1 = [], [], [], []
    for c in range(n_classes):
        b = binary_reduce(cm, c)
        acc.append(
            _safe_div(b.tp + b.tn, b.tp + b.tn + b.fp + b.fn, f"accuracy[{c}]", flags)
        )
        p = _safe_div(b.tp, b.tp + b.fp, f"precision[{c}]", flags)
        r = _safe_div(b.tp, b.tp + b.fn, f"recall[{c}]", flags)
        prec.append(p)
        rec.append(r)
        f1.append(_safe_div(2 * p * r, p + r, f"f1[{c}]", flags))
    total = int(cm.sum())
    overall = _safe_div(float(np.trace(cm)), total, "overall_accuracy", flags)
    return MetricsReport(
        per_class_accuracy=tuple(acc),
        per_class_precision=tuple(prec),
        per_class_recall=tuple(rec),
        per_class_f1=tuple(f1),
        macro_precision=float(np.mean(prec)),
        macro_recall=float(np.mean(rec)),
        macro_f1=float(np.mean(f1)),
        overall_accuracy=overall,
        zero_division_flags=tuple(flags),
    )


def roc_curve(
    y_true: np.ndarray, scores: np.ndarray, positive_class: int
) -> np.ndarray:
    """One-vs-rest ROC points as an (n, 2) array of (fpr, tpr).

    Scores descend; tied scores move as one atomic group, so ties produce a
    diagonal segment instead of an arbitrary staircase. Endpoints (0,0) and
    (1,1) are always present.
    """
    y_true = np.asarray(y_true).ravel()
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if y_true.shape != scores.shape:
        raise ValueError("labels and scores must align")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    pos = y_true == positive_class
    n_pos = int(pos.sum())
    n_neg = int(pos.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            f"ROC for class {positive_class} needs at least one positive "
            "and one negative sample"
        )
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = pos[order]

    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = scores.size
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        tp += int(sorted_pos[i:j].sum())
        fp += (j - i) - int(sorted_pos[i:j].sum())
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return np.asarray(points, dtype=np.float64)


def auc(curve: np.ndarray) -> float:
    """Trapezoidal area under an ROC curve given as (fpr, tpr) rows."""
    curve = np.asarray(curve, dtype=np.float64)
    if curve.ndim != 2 or curve.shape[1] != 2 or curve.shape[0] < 2:
        raise ValueError(f"expected an (n>=2, 2) curve, got shape {curve.shape}")
    x = curve[:, 0]
    y = curve[:, 1]
    if np.any(np.diff(x) < 0):
        raise ValueError("curve x-coordinates must be non-decreasing")
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * (x[1:] - x[:-1])))


def export_report(
    metrics: MetricsReport,
    cm: np.ndarray,
    curves: dict[int, np.ndarray] | None,
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write metrics.csv, confusion.csv, and roc_class<k>.csv files.

    Returns the paths keyed by file name. Float formatting is fixed so equal
    inputs yield byte-identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    def fmt(v: float) -> str:
        return f"{v:.10g}"

    metrics_path = out_dir / "metrics.csv"
    with open(metrics_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "accuracy", "precision", "recall", "f1", "auc"])
        n_classes = len(metrics.per_class_accuracy)
        for c in range(n_classes):
            auc_cell = (
                fmt(metrics.per_class_auc[c]) if metrics.per_class_auc else ""
            )
            writer.writerow(
                [
                    c,
                    fmt(metrics.per_class_accuracy[c]),
                    fmt(metrics.per_class_precision[c]),
                    fmt(metrics.per_class_recall[c]),
                    fmt(metrics.per_class_f1[c]),
                    auc_cell,
                ]
            )
        macro_auc = (
            fmt(float(np.mean(metrics.per_class_auc))) if metrics.per_class_auc else ""
        )
        writer.writerow(
            [
                "macro",
                fmt(float(np.mean(metrics.per_class_accuracy))),
                fmt(metrics.macro_precision),
                fmt(metrics.macro_recall),
                fmt(metrics.macro_f1),
                macro_auc,
            ]
        )
        writer.writerow(["overall", fmt(metrics.overall_accuracy), "", "", "", ""])
    paths["metrics.csv"] = metrics_path

    cm_path = out_dir / "confusion.csv"
    with open(cm_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(cm):
            writer.writerow([int(v) for v in row])
    paths["confusion.csv"] = cm_path

    for c in sorted(curves or {}):
        roc_path = out_dir / f"roc_class{c}.csv"
        with open(roc_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            for fpr, tpr in curves[c]:
                writer.writerow([fmt(fpr), fmt(tpr)])
        paths[f"roc_class{c}.csv"] = roc_path
    return paths

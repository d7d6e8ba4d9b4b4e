"""Accuracy, confusion matrices and experiment reports."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from artforensics.errors import LabelError, ShapeError


def accuracy(y_true, y_pred) -> float:
    t = np.asarray(y_true).ravel()
    p = np.asarray(y_pred).ravel()
    if len(t) != len(p):
        raise ShapeError(f"length mismatch: {len(t)} true labels vs {len(p)} predictions")
    if len(t) == 0:
        raise ShapeError("accuracy of an empty sample is undefined")
    return float(np.mean(t == p))


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns are predictions."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())

    def precision_recall(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-class precision and recall; 0 where undefined."""
        tp = np.diag(self.counts).astype(np.float64)
        predicted = self.counts.sum(axis=0)
        actual = self.counts.sum(axis=1)
        precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
        recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
        return precision, recall


def confusion(y_true, y_pred, labels, names=None) -> ConfusionMatrix:
    """Tally (true, predicted) pairs over ``labels`` in the given order.

    ``names`` optionally gives display names for the labels.
    """
    labels = list(labels)
    index = {v: i for i, v in enumerate(labels)}
    t = np.asarray(y_true).ravel().tolist()
    p = np.asarray(y_pred).ravel().tolist()
    if len(t) != len(p):
        raise ShapeError(f"length mismatch: {len(t)} true labels vs {len(p)} predictions")
    unseen = sorted({str(v) for v in t + p if v not in index})
    if unseen:
        raise LabelError(f"labels not in the label list: {', '.join(unseen)}")
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    np.add.at(counts, ([index[v] for v in t], [index[v] for v in p]), 1)
    shown = tuple(str(n) for n in (names if names is not None else labels))
    return ConfusionMatrix(shown, counts)


def provenance_errors(cm: ConfusionMatrix) -> dict[str, int]:
    """Split off-diagonal errors by provenance of the true and predicted class.

    Classes whose name starts with ``AI-`` count as AI-generated.
    """
    ai = np.array([name.lower().startswith("ai-") for name in cm.labels])
    off = cm.counts.copy()
    np.fill_diagonal(off, 0)
    return {
        "within_human": int(off[np.ix_(~ai, ~ai)].sum()),
        "human_to_ai": int(off[np.ix_(~ai, ai)].sum()),
        "within_ai": int(off[np.ix_(ai, ai)].sum()),
        "ai_to_human": int(off[np.ix_(ai, ~ai)].sum()),
    }


@dataclass
class ExperimentReport:
    task: str
    model_family: str
    best_config: dict
    cv_mean_accuracy: float | None
    test_accuracy: float
    confusion: ConfusionMatrix
    seed: int
    extractor_config_hash: str
    feature_names: tuple[str, ...] = ()
    rfe_curve: object | None = None  # select.RFECurve
    grid: object | None = None  # select.GridResult
    epochs: list | None = None  # neural.EpochRecord list
    notes: list[str] = field(default_factory=list)

    def check(self):
        if abs(self.test_accuracy - self.confusion.accuracy()) > 1e-12:
            raise ValueError("test accuracy disagrees with the confusion matrix")


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def format_confusion(cm: ConfusionMatrix) -> str:
    width = max(6, *(len(n) for n in cm.labels), len(str(cm.counts.max(initial=0))))
    lines = ["true \\ pred".ljust(width) + " " + " ".join(n.rjust(width) for n in cm.labels)]
    for name, row in zip(cm.labels, cm.counts):
        lines.append(name.ljust(width) + " " + " ".join(str(int(c)).rjust(width) for c in row))
    return "\n".join(lines)


def render_report(r: ExperimentReport, out_dir: str | os.PathLike | None = None) -> str:
    """Human-readable summary; with ``out_dir``, also the CSV/JSON artefacts.

    Files: summary.txt, report.json, accuracy.csv, confusion.csv,
    per_class.csv, plus grid.csv, rfe_curve.csv and epochs.csv when the
    report carries that data. Output depends only on the report contents.
    """
    r.check()
    precision, recall = r.confusion.precision_recall()
    lines = [
        f"task: {r.task}",
        f"model family: {r.model_family}",
        f"best config: {json.dumps(_jsonable(r.best_config), sort_keys=True)}",
        f"features: {len(r.feature_names)}",
        f"seed: {r.seed}",
        f"extractor config hash: {r.extractor_config_hash}",
    ]
    if r.cv_mean_accuracy is not None:
        lines.append(f"cv mean accuracy: {r.cv_mean_accuracy:.4f}")
    lines.append(f"test accuracy: {r.test_accuracy:.4f} ({r.confusion.total} test samples)")
    lines += ["", "confusion matrix (rows = true class):", format_confusion(r.confusion)]
    if len(r.confusion.labels) > 2:
        prov = provenance_errors(r.confusion)
        lines.append("errors by provenance: " + ", ".join(f"{k}={v}" for k, v in prov.items()))
    if r.grid is not None:
        n_ok = sum(row.status == "ok" for row in r.grid.rows)
        n_skip = sum(row.status == "skipped" for row in r.grid.rows)
        lines += ["", f"grid: {len(r.grid.rows)} cells ({n_ok} evaluated, {n_skip} skipped)"]
    if r.rfe_curve is not None:
        best = r.rfe_curve.best()
        lines += ["", f"RFE ({r.rfe_curve.ranker} ranking, k-fold CV accuracy): best "
                      f"{best.cv_accuracy:.4f} with {best.feature_count} features"]
    if r.epochs:
        last = r.epochs[-1]
        lines += ["", f"epochs: {last.epoch}; final val accuracy {last.val_acc:.4f}"]
    for note in r.notes:
        lines.append(f"note: {note}")
    summary = "\n".join(lines) + "\n"

    if out_dir is None:
        return summary
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    _write_csv(out / "accuracy.csv",
               ["model_family", "task", "n_features", "cv_mean_accuracy", "test_accuracy",
                "macro_precision", "macro_recall"],
               [[r.model_family, r.task, len(r.feature_names), _num(r.cv_mean_accuracy),
                 _num(r.test_accuracy), _num(precision.mean()), _num(recall.mean())]])
    _write_csv(out / "confusion.csv", ["true\\pred", *r.confusion.labels],
               [[name, *map(int, row)] for name, row in zip(r.confusion.labels, r.confusion.counts)])
    _write_csv(out / "per_class.csv", ["class", "support", "precision", "recall"],
               [[name, int(s), _num(p), _num(q)] for name, s, p, q in
                zip(r.confusion.labels, r.confusion.counts.sum(axis=1), precision, recall)])
    payload = {
        "task": r.task,
        "model_family": r.model_family,
        "best_config": _jsonable(r.best_config),
        "cv_mean_accuracy": r.cv_mean_accuracy,
        "test_accuracy": r.test_accuracy,
        "confusion": {"labels": list(r.confusion.labels), "counts": r.confusion.counts.tolist()},
        "seed": r.seed,
        "extractor_config_hash": r.extractor_config_hash,
        "feature_names": list(r.feature_names),
        "notes": list(r.notes),
    }
    if r.grid is not None:
        width = max((len(row.fold_scores) for row in r.grid.rows), default=0)
        keys = list(r.grid.rows[0].params) if r.grid.rows else []
        _write_csv(out / "grid.csv",
                   [*keys, "status", *(f"fold{i + 1}" for i in range(width)), "mean_accuracy",
                    "message"],
                   [[json.dumps(_jsonable(row.params[k])) if isinstance(row.params[k], (tuple, list))
                     else row.params[k] for k in keys]
                    + [row.status] + [_num(s) for s in row.fold_scores]
                    + [""] * (width - len(row.fold_scores))
                    + [_num(row.mean) if row.fold_scores else "", row.message]
                    for row in r.grid.rows])
        payload["grid_best_index"] = r.grid.best_index
    if r.rfe_curve is not None:
        _write_csv(out / "rfe_curve.csv", ["feature_count", "accuracy", "dropped_feature"],
                   [[p.feature_count, _num(p.cv_accuracy), p.dropped_feature or ""]
                    for p in r.rfe_curve.points])
        payload["rfe_ranker"] = r.rfe_curve.ranker
    if r.epochs:
        write_epoch_log(r.epochs, out / "epochs.csv")
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def write_epoch_log(epochs, path) -> None:
    _write_csv(Path(path), ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"],
               [[e.epoch, _num(e.train_loss), _num(e.train_acc), _num(e.val_loss), _num(e.val_acc)]
                for e in epochs])

"""Confusion matrix and macro-averaged classification metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError


@dataclass
class MetricsReport:
    confusion: np.ndarray  # rows = truth, columns = prediction
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: dict

    def to_dict(self, class_names=None):
        names = class_names or [str(i) for i in range(len(self.confusion))]
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.precision,
            "macro_recall": self.recall,
            "macro_f1": self.f1,
            "classes": list(names),
            "confusion": self.confusion.tolist(),
            "per_class": {names[k]: v for k, v in self.per_class.items()},
        }

    def table(self, class_names=None):
        names = class_names or [str(i) for i in range(len(self.confusion))]
        width = max(8, *(len(n) + 2 for n in names))
        lines = [
            f"accuracy   {self.accuracy:.4f}",
            f"precision  {self.precision:.4f}  (macro)",
            f"recall     {self.recall:.4f}  (macro)",
            f"F1         {self.f1:.4f}  (macro)",
            "",
            "truth \\ pred".ljust(width) + "".join(n.rjust(width) for n in names),
        ]
        for name, row in zip(names, self.confusion):
            lines.append(name.ljust(width) + "".join(str(int(v)).rjust(width) for v in row))
        return "\n".join(lines) + "\n"


def confusion_matrix(truth, predictions, n_classes):
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(truth, dtype=int), np.asarray(predictions, dtype=int)), 1)
    return cm


def metrics_from_confusion(cm) -> MetricsReport:
    """Macro metrics over the classes with non-zero support.

    Precision of a class that is never predicted counts as 0.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise ShapeError("cannot evaluate an empty confusion matrix")
    tp = np.diag(cm).astype(np.float64)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    per_class = {}
    ps, rs, fs = [], [], []
    for k in np.flatnonzero(support > 0):
        p = tp[k] / predicted[k] if predicted[k] else 0.0
        r = tp[k] / support[k]
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        per_class[int(k)] = {"precision": p, "recall": r, "f1": f, "support": int(support[k])}
        ps.append(p)
        rs.append(r)
        fs.append(f)
    return MetricsReport(cm, float(tp.sum() / total), float(np.mean(ps)), float(np.mean(rs)), float(np.mean(fs)), per_class)


def evaluate(predictions, truth, n_classes) -> MetricsReport:
    predictions = np.asarray(predictions, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predictions.shape != truth.shape:
        raise ShapeError(f"{predictions.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise ShapeError("no samples to evaluate")
    return metrics_from_confusion(confusion_matrix(truth, predictions, n_classes))

"""Nearest-centroid classifier (Euclidean, ties to the lowest class index)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError


@dataclass
class CentroidModel:
    centroids: np.ndarray  # (n_classes, d)


def train_nearest_centroid(X, y, n_classes=None) -> CentroidModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X must be (n_samples, d) with one label per row")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    counts = np.bincount(y, minlength=n_classes)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ValueError(f"classes without training samples: {empty.tolist()}")
    sums = np.zeros((n_classes, X.shape[1]))
    np.add.at(sums, y, X)
    return CentroidModel(sums / counts[:, None])


def predict_nearest_centroid(model: CentroidModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.centroids.shape[1]:
        raise ShapeError(f"expected {model.centroids.shape[1]} features, got {X.shape[1]}")
    d2 = np.stack([((X - c) ** 2).sum(axis=1) for c in model.centroids], axis=1)
    return np.argmin(d2, axis=1)  # argmin returns the first minimum -> lowest class index

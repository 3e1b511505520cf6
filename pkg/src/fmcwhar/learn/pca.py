"""Principal component analysis via thin SVD of the centred data."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError


@dataclass
class PcaModel:
    components: np.ndarray  # (k, d), orthonormal rows
    mean: np.ndarray  # (d,)
    explained_variance: np.ndarray  # (k,)

    @property
    def k(self):
        return self.components.shape[0]

    @property
    def dim(self):
        return self.components.shape[1]


def pca_fit(X, k=100) -> PcaModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ShapeError("PCA needs a 2-D array with at least two samples")
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} must lie in 1..min(n_samples, dim)={min(n, d)}")
    mean = X.mean(axis=0)
    # thin SVD: cheap when d >> n, which is the usual case for flattened segments
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = vt[:k].copy()
    var = s[:k] ** 2 / (n - 1)
    # deterministic sign: largest-magnitude entry of each component positive
    pivot = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), pivot])
    signs[signs == 0] = 1.0
    comps *= signs[:, None]
    if var.size and var[-1] < 1e-12:
        warnings.warn(
            f"trailing principal components carry ~zero variance (min {var[-1]:.2e}); data are rank deficient",
            RuntimeWarning,
            stacklevel=2,
        )
    return PcaModel(comps, mean, var)


def pca_transform(model: PcaModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise ShapeError(f"expected vectors of length {model.dim}, got {x.shape[-1]}")
    return (x - model.mean) @ model.components.T


def pca_inverse_transform(model: PcaModel, z) -> np.ndarray:
    return np.asarray(z) @ model.components + model.mean

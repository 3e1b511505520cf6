"""Trained model artifact: normalizer + optional PCA + classifier, stored as ``.npz``."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..cube import CHANNELS, Normalizer, apply_normalizer, fit_normalizer
from ..errors import FormatError, VersionError
from ..io import atomic_write
from .centroid import CentroidModel, predict_nearest_centroid, train_nearest_centroid
from .mlp import MlpConfig, MlpModel, predict_mlp, train_mlp
from .pca import PcaModel, pca_fit, pca_transform

MODEL_VERSION = 1
MODEL_KINDS = ("centroid", "mlp")


@dataclass
class HarModel:
    kind: str
    classes: list[str]
    features: tuple[str, ...]
    normalizer: Normalizer
    pca: PcaModel | None
    classifier: CentroidModel | MlpModel
    config_digest: str = ""

    def vectors(self, segments):
        X = np.array([apply_normalizer(self.normalizer, s).flatten(self.features) for s in segments])
        return X if self.pca is None else pca_transform(self.pca, X)

    def predict(self, segments):
        X = self.vectors(segments)
        if self.kind == "centroid":
            return predict_nearest_centroid(self.classifier, X)
        return predict_mlp(self.classifier, X)

    def label_indices(self, segments):
        index = {c: i for i, c in enumerate(self.classes)}
        return np.array([index[s.label] for s in segments], dtype=int)


def parse_features(spec):
    """``"rd,re"`` / ``"rd+ra+re"`` / iterable -> ordered channel tuple."""
    if isinstance(spec, str):
        parts = [p.strip().lower() for p in spec.replace("+", ",").split(",") if p.strip()]
    else:
        parts = [str(p).lower() for p in spec]
    bad = [p for p in parts if p not in CHANNELS]
    if bad or not parts:
        raise ValueError(f"features must be a non-empty combination of {', '.join(CHANNELS)}; got {spec!r}")
    return tuple(c for c in CHANNELS if c in parts)


def fit_model(
    train,
    val,
    classes,
    kind="centroid",
    features=CHANNELS,
    pca_components=100,
    seed=42,
    config_digest="",
) -> HarModel:
    """Normalizer and PCA see train+val; the classifier is fitted on train only."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
    train, val = list(train), list(val)
    if not train:
        raise ValueError("training partition is empty")
    features = parse_features(features)
    norm = fit_normalizer(train + val)
    model = HarModel(kind, list(classes), features, norm, None, None, config_digest)
    if pca_components:
        X_fit = np.array([apply_normalizer(norm, s).flatten(features) for s in train + val])
        # centring costs one dimension, so n samples span at most n - 1 components
        k = min(pca_components, X_fit.shape[0] - 1, X_fit.shape[1])
        model.pca = pca_fit(X_fit, k)
    X = model.vectors(train)
    y = model.label_indices(train)
    if kind == "centroid":
        model.classifier = train_nearest_centroid(X, y, len(classes))
    else:
        model.classifier = train_mlp(X, y, len(classes), MlpConfig(seed=seed))
    return model


def save_model(path, model: HarModel):
    meta = {
        "format": "fmcwhar-model",
        "version": MODEL_VERSION,
        "kind": model.kind,
        "classes": model.classes,
        "features": list(model.features),
        "config_digest": model.config_digest,
        "has_pca": model.pca is not None,
    }
    arrays = dict(model.normalizer.to_arrays())
    if model.pca is not None:
        arrays.update(
            pca_components=model.pca.components, pca_mean=model.pca.mean, pca_variance=model.pca.explained_variance
        )
    if model.kind == "centroid":
        arrays["centroids"] = model.classifier.centroids
    else:
        meta["n_layers"] = len(model.classifier.weights)
        for i, (W, b) in enumerate(zip(model.classifier.weights, model.classifier.biases)):
            arrays[f"mlp_w{i}"] = W
            arrays[f"mlp_b{i}"] = b
        arrays["mlp_loss_curve"] = np.asarray(model.classifier.loss_curve)
    with atomic_write(path) as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_model(path) -> HarModel:
    with np.load(path, allow_pickle=False) as z:
        a = {k: z[k] for k in z.files}
    try:
        meta = json.loads(str(a["meta"]))
    except (KeyError, json.JSONDecodeError):
        raise FormatError(f"{path} is not a model artifact") from None
    if meta.get("format") != "fmcwhar-model":
        raise FormatError(f"{path} is not a model artifact")
    if meta["version"] != MODEL_VERSION:
        raise VersionError(f"unsupported model version {meta['version']}")
    pca = None
    if meta["has_pca"]:
        pca = PcaModel(a["pca_components"], a["pca_mean"], a["pca_variance"])
    if meta["kind"] == "centroid":
        clf = CentroidModel(a["centroids"])
    else:
        n = meta["n_layers"]
        clf = MlpModel([a[f"mlp_w{i}"] for i in range(n)], [a[f"mlp_b{i}"] for i in range(n)], list(a["mlp_loss_curve"]))
    return HarModel(
        meta["kind"],
        list(meta["classes"]),
        tuple(meta["features"]),
        Normalizer.from_arrays(a),
        pca,
        clf,
        meta["config_digest"],
    )

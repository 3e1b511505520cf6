from .centroid import CentroidModel, predict_nearest_centroid, train_nearest_centroid
from .metrics import MetricsReport, confusion_matrix, evaluate, metrics_from_confusion
from .mlp import MlpConfig, MlpModel, init_mlp, loss_and_grads, predict_mlp, train_mlp
from .pca import PcaModel, pca_fit, pca_inverse_transform, pca_transform
from .splits import SplitPlan, make_csv_split, make_lopo_split

__all__ = [
    "CentroidModel",
    "MetricsReport",
    "MlpConfig",
    "MlpModel",
    "PcaModel",
    "SplitPlan",
    "confusion_matrix",
    "evaluate",
    "init_mlp",
    "loss_and_grads",
    "make_csv_split",
    "make_lopo_split",
    "metrics_from_confusion",
    "pca_fit",
    "pca_inverse_transform",
    "pca_transform",
    "predict_mlp",
    "predict_nearest_centroid",
    "train_mlp",
    "train_nearest_centroid",
]

"""Two-hidden-layer ReLU perceptron trained with Adam on softmax cross-entropy.

Hyperparameters default to the published configuration (128/64 hidden units,
learning rate 1e-3, 300 epochs, seed 42).  Everything unspecified there follows
the usual scikit-learn defaults: L2 penalty 1e-4, mini-batches of min(200, n),
Glorot-uniform initialisation, and stopping once the epoch loss fails to improve
by 1e-4 for 10 consecutive epochs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError, TrainingError


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (128, 64)
    learning_rate: float = 1e-3
    max_epochs: int = 300
    seed: int = 42
    l2: float = 1e-4
    batch_size: int = 200
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    tol: float = 1e-4
    n_iter_no_change: int = 10


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss_curve: list[float] = field(default_factory=list)

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def params(self):
        return self.weights + self.biases


def init_mlp(layer_sizes, seed=42) -> MlpModel:
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, fan_out))
    return MlpModel(weights, biases)


def _forward(model, X):
    acts = [X]
    h = X
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ W + b
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model: MlpModel, X, y, l2=0.0):
    """Mean cross-entropy plus ``l2 / (2 n) * sum ||W||^2`` and its gradients.

    Returns ``(loss, weight_grads, bias_grads)``.
    """
    n = X.shape[0]
    acts = _forward(model, X)
    p = _softmax(acts[-1])
    loss = -np.mean(np.log(np.maximum(p[np.arange(n), y], 1e-300)))
    loss += 0.5 * l2 * sum(float((W * W).sum()) for W in model.weights) / n
    delta = p
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta + l2 * model.weights[i] / n
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ model.weights[i].T) * (acts[i] > 0)
    return loss, gw, gb


def train_mlp(X, y, n_classes=None, config: MlpConfig | None = None) -> MlpModel:
    cfg = config or MlpConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X must be (n_samples, d) with one label per row")
    if not np.isfinite(X).all():
        raise ShapeError("training features contain non-finite values")
    if np.unique(y).size < 2:
        raise ValueError("MLP training needs at least two classes")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    model = init_mlp([X.shape[1], *cfg.hidden, n_classes], cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    params = model.params
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0
    n = X.shape[0]
    batch = min(cfg.batch_size, n)
    best = np.inf
    stale = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, batch):
            idx = order[s : s + batch]
            loss, gw, gb = loss_and_grads(model, X[idx], y[idx], cfg.l2)
            if not np.isfinite(loss) or not all(np.isfinite(g).all() for g in gw + gb):
                raise TrainingError(f"training diverged at epoch {epoch} (loss {loss})")
            total += loss * idx.size
            step += 1
            lr = cfg.learning_rate * np.sqrt(1 - cfg.beta2**step) / (1 - cfg.beta1**step)
            for p, g, mi, vi in zip(params, gw + gb, m, v):
                mi *= cfg.beta1
                mi += (1 - cfg.beta1) * g
                vi *= cfg.beta2
                vi += (1 - cfg.beta2) * g * g
                p -= lr * mi / (np.sqrt(vi) + cfg.epsilon)
        epoch_loss = total / n
        model.loss_curve.append(epoch_loss)
        if epoch_loss > best - cfg.tol:
            stale += 1
        else:
            stale = 0
        best = min(best, epoch_loss)
        if stale >= cfg.n_iter_no_change:
            break
    return model


def predict_proba(model: MlpModel, X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.weights[0].shape[0]:
        raise ShapeError(f"expected {model.weights[0].shape[0]} features, got {X.shape[1]}")
    return _softmax(_forward(model, X)[-1])


def predict_mlp(model: MlpModel, X):
    return np.argmax(predict_proba(model, X), axis=1)

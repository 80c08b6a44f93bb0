"""Fully-connected network: 9 dense layers, rectifier x8, softmax output.

Trained from scratch with mini-batch gradient descent using first and
second moment estimates with bias correction (the standard adaptive-moment
scheme) on a categorical cross-entropy loss. Hidden widths default to a
tapering 256-128-128-64-64-32-32-32 stack between the 63 inputs and the 24
letter outputs. A finite-difference gradient checker guards the
backpropagation.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import N_CLASSES, N_FEATURES, Dataset

DEFAULT_WIDTHS = (N_FEATURES, 256, 128, 128, 64, 64, 32, 32, 32, N_CLASSES)
N_LAYERS = 9
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class MlpModel:
    weights: tuple  # 9 matrices, layer l maps widths[l] -> widths[l+1]
    biases: tuple  # 9 vectors

    @property
    def widths(self) -> tuple:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @classmethod
    def zeros(cls, widths=DEFAULT_WIDTHS) -> "MlpModel":
        """All-zero parameters; forward output is uniform over the classes."""
        weights = tuple(np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:]))
        biases = tuple(np.zeros(b) for b in widths[1:])
        return cls(weights, biases)


def _validate_widths(widths):
    widths = tuple(int(w) for w in widths)
    if len(widths) != N_LAYERS + 1:
        raise ValueError(f"expected {N_LAYERS + 1} layer widths (9 dense layers), got {len(widths)}")
    if widths[0] != N_FEATURES:
        raise ValueError(f"input width must be {N_FEATURES}, got {widths[0]}")
    if widths[-1] != N_CLASSES:
        raise ValueError(f"output width must be {N_CLASSES}, got {widths[-1]}")
    if any(w < 1 for w in widths):
        raise ValueError("layer widths must be positive")
    return widths


def mlp_init(widths=DEFAULT_WIDTHS, seed: int = 0) -> MlpModel:
    """Seeded scaled-uniform init: W ~ U(+-sqrt(6/(fan_in+fan_out))), biases 0."""
    widths = _validate_widths(widths)
    rng = np.random.default_rng(seed)
    weights = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    biases = tuple(np.zeros(w) for w in widths[1:])
    return MlpModel(tuple(weights), biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    """Class probabilities; accepts one feature vector or an (m, d) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None] if single else x
    last = len(model.weights) - 1
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ W + b
        if l < last:
            h = np.maximum(h, 0.0)
    probs = _softmax(h)
    return probs[0] if single else probs


def mlp_loss(probs, target: int) -> float:
    """Categorical cross-entropy of one probability vector against its label."""
    p = max(float(np.asarray(probs)[target]), PROB_FLOOR)
    return -np.log(p)


def _forward_cached(model, X):
    activations = [X]
    pre = []
    last = len(model.weights) - 1
    h = X
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ W + b
        pre.append(z)
        h = np.maximum(z, 0.0) if l < last else z
        activations.append(h)
    probs = _softmax(activations[-1])
    return activations, pre, probs


def _backward(model, activations, pre, probs, onehot):
    """Mean-over-batch gradients of the cross-entropy loss."""
    m = probs.shape[0]
    grad_w = [None] * len(model.weights)
    grad_b = [None] * len(model.biases)
    delta = (probs - onehot) / m
    for l in range(len(model.weights) - 1, -1, -1):
        grad_w[l] = activations[l].T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (pre[l - 1] > 0.0)
    return grad_w, grad_b


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 128
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("moment decay rates must lie strictly in (0, 1)")


@dataclass(frozen=True)
class TrainingCurves:
    """Per-epoch mean training loss and training accuracy."""

    loss: np.ndarray = field(default_factory=lambda: np.empty(0))
    accuracy: np.ndarray = field(default_factory=lambda: np.empty(0))


def mlp_train(model: MlpModel, train: Dataset, cfg: TrainConfig = TrainConfig()):
    """Mini-batch adaptive-moment training; returns (new model, curves).

    The input model is left untouched. Loss and accuracy are accumulated
    from the forward passes the optimizer itself takes, so each epoch entry
    reflects the training set as seen during that epoch.
    """
    if len(train) == 0:
        raise ValueError("training set must be non-empty")
    X = train.features()
    y = train.labels
    onehot_all = np.zeros((len(train), N_CLASSES))
    onehot_all[np.arange(len(train)), y] = 1.0

    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    mw = [np.zeros_like(w) for w in weights]
    vw = [np.zeros_like(w) for w in weights]
    mb = [np.zeros_like(b) for b in biases]
    vb = [np.zeros_like(b) for b in biases]

    rng = np.random.default_rng(cfg.seed)
    lr, b1, b2, eps = cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon
    losses = np.empty(cfg.epochs)
    accuracies = np.empty(cfg.epochs)
    step = 0
    current = MlpModel(tuple(weights), tuple(biases))

    def adam_update(param, grad, m, v, corr1, corr2):
        # in-place first/second moment tracking with bias correction
        m *= b1
        m += (1 - b1) * grad
        v *= b2
        v += (1 - b2) * grad**2
        param -= lr * (m / corr1) / (np.sqrt(v / corr2) + eps)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train))
        loss_sum = 0.0
        correct = 0
        for start in range(0, len(train), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            xb, yb, ob = X[batch], y[batch], onehot_all[batch]
            activations, pre, probs = _forward_cached(current, xb)
            p_target = np.maximum(probs[np.arange(len(batch)), yb], PROB_FLOOR)
            loss_sum += -np.log(p_target).sum()
            correct += int((probs.argmax(axis=1) == yb).sum())
            grad_w, grad_b = _backward(current, activations, pre, probs, ob)
            step += 1
            corr1 = 1.0 - b1**step
            corr2 = 1.0 - b2**step
            for l in range(len(weights)):
                adam_update(weights[l], grad_w[l], mw[l], vw[l], corr1, corr2)
                adam_update(biases[l], grad_b[l], mb[l], vb[l], corr1, corr2)
        losses[epoch] = loss_sum / len(train)
        accuracies[epoch] = correct / len(train)
    return current, TrainingCurves(loss=losses, accuracy=accuracies)


def mlp_predict_batch(model: MlpModel, queries) -> np.ndarray:
    return mlp_forward(model, np.atleast_2d(np.asarray(queries, dtype=float))).argmax(axis=1)


def mlp_predict(model: MlpModel, query) -> int:
    return int(mlp_forward(model, np.asarray(query, dtype=float).reshape(-1)).argmax())


def _loss_at(model, x, target) -> float:
    return mlp_loss(mlp_forward(model, x), target)


def gradient_check(model: MlpModel, x, target: int, h: float = 1e-5, corruption: float = 0.0) -> float:
    """Max relative error between backprop and central finite differences.

    Every weight and bias is perturbed on a single labeled feature vector;
    each parameter tensor contributes ||analytic - numeric|| / max(norms)
    and the worst tensor is returned. `corruption` inflates the analytic
    gradient by that relative amount (negative control hook: a corrupted
    gradient must be caught).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    activations, pre, probs = _forward_cached(model, x[None])
    onehot = np.zeros((1, N_CLASSES))
    onehot[0, target] = 1.0
    grad_w, grad_b = _backward(model, activations, pre, probs, onehot)
    if corruption:
        grad_w = [g * (1.0 + corruption) for g in grad_w]
        grad_b = [g * (1.0 + corruption) for g in grad_b]

    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    probe = MlpModel(tuple(weights), tuple(biases))
    worst = 0.0
    for l in range(len(weights)):
        for arr, analytic in ((weights[l], grad_w[l]), (biases[l], grad_b[l])):
            flat = arr.reshape(-1)
            numeric = np.empty(flat.size)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + h
                up = _loss_at(probe, x, target)
                flat[i] = keep - h
                down = _loss_at(probe, x, target)
                flat[i] = keep
                numeric[i] = (up - down) / (2.0 * h)
            gap = np.linalg.norm(analytic.reshape(-1) - numeric)
            scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
            worst = max(worst, gap / scale)
    return worst

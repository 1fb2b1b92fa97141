"""Small classifier zoo: logistic regression, one-hidden-layer-style MLP, and a
Gini decision tree. All three expose the same black-box interface (label and
class-probability queries) and persist to a versioned JSON model file.

Training is deterministic given the config seed. Logistic regression uses
full-batch gradient descent; the MLP uses seeded mini-batch SGD with sigmoid
hidden activations and a softmax head; the tree uses midpoint thresholds and
strict weighted-Gini improvement with ties broken toward the lowest feature
index.
"""

import json
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dataset import LabeledDataset, Sample
from .errors import (
    CorruptModelFile,
    DegenerateLabels,
    EmptyDataset,
    InvalidConfig,
    ShapeMismatch,
    VersionMismatch,
)
from .rng import rng_for

MODEL_FILE_VERSION = 1
_MLP_BATCH = 32  # fixed mini-batch size; not a tuning surface


@dataclass(frozen=True)
class TrainConfig:
    model_kind: str = "logreg"  # logreg | mlp | tree
    learning_rate: float = 0.1
    epochs: int = 500
    hidden_units: tuple = (16,)
    max_depth: int = 8
    min_leaf: int = 1
    seed: int = 0
    l2: float = 0.0

    def validate(self):
        if self.model_kind not in ("logreg", "mlp", "tree"):
            raise InvalidConfig(f"unknown model kind {self.model_kind!r}")
        if self.learning_rate <= 0:
            raise InvalidConfig("learning_rate must be > 0")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if self.model_kind == "mlp" and not self.hidden_units:
            raise InvalidConfig("MLP needs at least one hidden layer")
        if self.model_kind == "tree" and self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise InvalidConfig("min_leaf must be >= 1")
        if self.l2 < 0:
            raise InvalidConfig("l2 must be >= 0")


def mlp_default_config(**kw) -> TrainConfig:
    base = dict(model_kind="mlp", learning_rate=0.05, epochs=200, hidden_units=(16,))
    base.update(kw)
    return TrainConfig(**base)


def _as_features(x) -> np.ndarray:
    if isinstance(x, Sample):
        return x.features
    return np.asarray(x, dtype=np.float64)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class PredictionModel(ABC):
    """Opaque classifier: label and class-probability queries only."""

    k: int
    d: int

    @abstractmethod
    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        """(n, d) -> (n, k) rows summing to 1."""

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba_batch(X), axis=1)

    def predict_proba(self, x) -> np.ndarray:
        return self.predict_proba_batch(_as_features(x)[None, :])[0]

    def predict(self, x) -> int:
        return int(np.argmax(self.predict_proba(x)))


@dataclass(frozen=True)
class LogRegModel(PredictionModel):
    weights: np.ndarray  # (k, d)
    bias: np.ndarray  # (k,)
    seed: int = 0
    loss_curve: np.ndarray = field(default=None, compare=False, repr=False)

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def d(self):
        return self.weights.shape[1]

    def predict_proba_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        return softmax(X @ self.weights.T + self.bias)


@dataclass(frozen=True)
class MlpModel(PredictionModel):
    layer_weights: tuple  # of (out, in) arrays, last maps to k
    layer_biases: tuple  # of (out,) arrays
    seed: int = 0
    loss_curve: np.ndarray = field(default=None, compare=False, repr=False)

    @property
    def k(self):
        return self.layer_weights[-1].shape[0]

    @property
    def d(self):
        return self.layer_weights[0].shape[1]

    def predict_proba_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        return mlp_forward(self.layer_weights, self.layer_biases, X)[-1]


@dataclass(frozen=True)
class TreeModel(PredictionModel):
    """Array-encoded tree: internal nodes carry feature/threshold/children,
    leaves carry feature == -1 and a class distribution."""

    feature: np.ndarray  # (m,) int64, -1 for leaves
    threshold: np.ndarray  # (m,) float64
    left: np.ndarray  # (m,) int64
    right: np.ndarray  # (m,) int64
    leaf_dist: np.ndarray  # (m, k) float64
    seed: int = 0

    @property
    def k(self):
        return self.leaf_dist.shape[1]

    @property
    def d(self):
        return int(self._d)

    def predict_proba_batch(self, X):
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        leaves = kernels.tree_leaf_indices(self.feature, self.threshold, self.left, self.right, X)
        return self.leaf_dist[leaves]

    @property
    def n_internal(self):
        return int(np.sum(self.feature >= 0))


def _check_trainable(data: LabeledDataset):
    if data.n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if len(np.unique(data.labels)) < 2:
        raise DegenerateLabels("training data has a single class")


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    Y = np.zeros((y.shape[0], k))
    Y[np.arange(y.shape[0]), y] = 1.0
    return Y


def logreg_loss_grad(W, b, X, Y, l2):
    """Mean cross-entropy + 0.5*l2*||W||^2 and its gradient (bias unpenalized)."""
    n = X.shape[0]
    P = softmax(X @ W.T + b)
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), Y.argmax(axis=1)], 1e-300)))
    loss += 0.5 * l2 * float(np.sum(W * W))
    G = (P - Y) / n
    return loss, G.T @ X + l2 * W, G.sum(axis=0)


def train_logreg(data: LabeledDataset, cfg: TrainConfig) -> LogRegModel:
    """Full-batch gradient descent on softmax cross-entropy."""
    cfg.validate()
    _check_trainable(data)
    rng = rng_for(cfg.seed, 0)
    W = rng.normal(0.0, 0.01, size=(data.k, data.d))
    b = np.zeros(data.k)
    Y = _one_hot(data.labels, data.k)
    losses = np.empty(cfg.epochs)
    for e in range(cfg.epochs):
        loss, gW, gb = logreg_loss_grad(W, b, data.features, Y, cfg.l2)
        losses[e] = loss
        W = W - cfg.learning_rate * gW
        b = b - cfg.learning_rate * gb
    return LogRegModel(weights=W, bias=b, seed=cfg.seed, loss_curve=losses)


def mlp_forward(weights, biases, X):
    """Activations per layer; sigmoid on hidden layers, softmax on the head."""
    acts = [X]
    a = X
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        a = softmax(z) if i == last else sigmoid(z)
        acts.append(a)
    return acts


def mlp_loss_grad(weights, biases, X, Y, l2):
    """Loss and per-layer gradients via backprop; checked against finite differences."""
    n = X.shape[0]
    acts = mlp_forward(weights, biases, X)
    P = acts[-1]
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), Y.argmax(axis=1)], 1e-300)))
    loss += 0.5 * l2 * sum(float(np.sum(W * W)) for W in weights)
    gws, gbs = [], []
    delta = (P - Y) / n
    for i in range(len(weights) - 1, -1, -1):
        a_prev = acts[i]
        gws.append(delta.T @ a_prev + l2 * weights[i])
        gbs.append(delta.sum(axis=0))
        if i > 0:
            delta = (delta @ weights[i]) * acts[i] * (1.0 - acts[i])
    return loss, gws[::-1], gbs[::-1]


def init_mlp_params(d, hidden_units, k, seed):
    rng = rng_for(seed, 0)
    sizes = [d] + list(hidden_units) + [k]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def train_mlp(data: LabeledDataset, cfg: TrainConfig) -> MlpModel:
    """Seeded mini-batch SGD; shuffling order is part of the deterministic contract."""
    cfg.validate()
    _check_trainable(data)
    weights, biases = init_mlp_params(data.d, cfg.hidden_units, data.k, cfg.seed)
    Y = _one_hot(data.labels, data.k)
    shuffle_rng = rng_for(cfg.seed, 1)
    losses = np.empty(cfg.epochs)
    for e in range(cfg.epochs):
        order = shuffle_rng.permutation(data.n)
        for start in range(0, data.n, _MLP_BATCH):
            sel = order[start : start + _MLP_BATCH]
            _, gws, gbs = mlp_loss_grad(weights, biases, data.features[sel], Y[sel], cfg.l2)
            for i in range(len(weights)):
                weights[i] = weights[i] - cfg.learning_rate * gws[i]
                biases[i] = biases[i] - cfg.learning_rate * gbs[i]
        losses[e], _, _ = mlp_loss_grad(weights, biases, data.features, Y, cfg.l2)
    return MlpModel(
        layer_weights=tuple(weights), layer_biases=tuple(biases), seed=cfg.seed, loss_curve=losses
    )


def train_tree(data: LabeledDataset, cfg: TrainConfig) -> TreeModel:
    """Top-down induction; splits must strictly reduce weighted Gini impurity."""
    cfg.validate()
    if data.n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    X, y, k = data.features, data.labels, data.k
    feature, threshold, left, right, dists = [], [], [], [], []

    def node_dist(idx):
        counts = np.bincount(y[idx], minlength=k).astype(np.float64)
        return counts / counts.sum()

    def build(idx, depth):
        me = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        dists.append(node_dist(idx))
        if depth >= cfg.max_depth or idx.size < 2 * cfg.min_leaf or len(np.unique(y[idx])) == 1:
            return me
        f, thr, child_imp, parent_imp = kernels.best_gini_split(
            np.ascontiguousarray(X[idx]), y[idx], k, cfg.min_leaf
        )
        if f < 0 or parent_imp - child_imp <= 1e-12:
            return me
        mask = X[idx, f] <= thr
        feature[me] = int(f)
        threshold[me] = float(thr)
        left[me] = build(idx[mask], depth + 1)
        right[me] = build(idx[~mask], depth + 1)
        return me

    build(np.arange(data.n, dtype=np.int64), 0)
    model = TreeModel(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        leaf_dist=np.asarray(dists, dtype=np.float64),
        seed=cfg.seed,
    )
    object.__setattr__(model, "_d", data.d)
    return model


def train_model(data: LabeledDataset, cfg: TrainConfig) -> PredictionModel:
    cfg.validate()
    if cfg.model_kind == "logreg":
        return train_logreg(data, cfg)
    if cfg.model_kind == "mlp":
        return train_mlp(data, cfg)
    return train_tree(data, cfg)


def accuracy(model: PredictionModel, data: LabeledDataset) -> float:
    if data.n == 0:
        raise EmptyDataset("accuracy over an empty dataset is undefined")
    return float(np.mean(model.predict_batch(data.features) == data.labels))


def _model_kind(model) -> str:
    return {LogRegModel: "logreg", MlpModel: "mlp", TreeModel: "tree"}[type(model)]


def save_model(model: PredictionModel, path) -> None:
    """Write the versioned JSON model file; float repr round-trips exactly."""
    kind = _model_kind(model)
    if kind == "logreg":
        params = {"weights": model.weights.tolist(), "bias": model.bias.tolist()}
    elif kind == "mlp":
        params = {
            "weights": [W.tolist() for W in model.layer_weights],
            "biases": [b.tolist() for b in model.layer_biases],
        }
    else:
        params = {
            "feature": model.feature.tolist(),
            "threshold": model.threshold.tolist(),
            "left": model.left.tolist(),
            "right": model.right.tolist(),
            "leaf_dist": model.leaf_dist.tolist(),
            "d": model.d,
        }
    obj = {
        "version": MODEL_FILE_VERSION,
        "model_kind": kind,
        "k": int(model.k),
        "d": int(model.d),
        "seed": int(model.seed),
        "parameters": params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def load_model(path, expect_d=None, expect_k=None) -> PredictionModel:
    if not os.path.isfile(path):
        raise CorruptModelFile(f"no such file: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModelFile(f"unreadable model file {path}: {exc}") from None
    try:
        if obj["version"] != MODEL_FILE_VERSION:
            raise VersionMismatch(f"model file version {obj['version']}, expected {MODEL_FILE_VERSION}")
        kind = obj["model_kind"]
        params = obj["parameters"]
        seed = int(obj.get("seed", 0))
        if kind == "logreg":
            model = LogRegModel(
                weights=np.asarray(params["weights"], dtype=np.float64),
                bias=np.asarray(params["bias"], dtype=np.float64),
                seed=seed,
            )
        elif kind == "mlp":
            model = MlpModel(
                layer_weights=tuple(np.asarray(W, dtype=np.float64) for W in params["weights"]),
                layer_biases=tuple(np.asarray(b, dtype=np.float64) for b in params["biases"]),
                seed=seed,
            )
        elif kind == "tree":
            model = TreeModel(
                feature=np.asarray(params["feature"], dtype=np.int64),
                threshold=np.asarray(params["threshold"], dtype=np.float64),
                left=np.asarray(params["left"], dtype=np.int64),
                right=np.asarray(params["right"], dtype=np.int64),
                leaf_dist=np.asarray(params["leaf_dist"], dtype=np.float64),
                seed=seed,
            )
            object.__setattr__(model, "_d", int(params["d"]))
        else:
            raise CorruptModelFile(f"unknown model kind {kind!r}")
        if obj["d"] != model.d or obj["k"] != model.k:
            raise CorruptModelFile("declared k/d disagree with parameter shapes")
    except VersionMismatch:
        raise
    except CorruptModelFile:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelFile(f"malformed model file {path}: {exc}") from None
    if expect_d is not None and model.d != expect_d:
        raise ShapeMismatch(f"model d={model.d} but dataset d={expect_d}")
    if expect_k is not None and model.k != expect_k:
        raise ShapeMismatch(f"model k={model.k} but dataset k={expect_k}")
    return model

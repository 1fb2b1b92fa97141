import numpy as np
import pytest

from evadex.dataset import FeatureKind, LabeledDataset, Sample
from evadex.models import PredictionModel


class PlantedLogit(PredictionModel):
    """Binary black box with a known linear logit: p(1) = sigmoid(c.x + b)."""

    def __init__(self, coef, bias=0.0):
        self.coef = np.asarray(coef, dtype=np.float64)
        self.bias = float(bias)
        self.k = 2
        self.d = self.coef.shape[0]

    def predict_proba_batch(self, X):
        z = np.asarray(X, dtype=np.float64) @ self.coef + self.bias
        p1 = 1.0 / (1.0 + np.exp(-z))
        return np.stack([1.0 - p1, p1], axis=1)


class ConstantModel(PredictionModel):
    def __init__(self, probs, d=1):
        self.probs = np.asarray(probs, dtype=np.float64)
        self.k = self.probs.shape[0]
        self.d = d

    def predict_proba_batch(self, X):
        return np.repeat(self.probs[None, :], np.asarray(X).shape[0], axis=0)


class StumpModel(PredictionModel):
    """Predicts class 1 iff feature `feat` equals `trigger` (0 or 1)."""

    def __init__(self, d, feat, trigger=0.0, margin=0.9):
        self.d = d
        self.k = 2
        self.feat = feat
        self.trigger = trigger
        self.margin = margin

    def predict_proba_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        hit = X[:, self.feat] == self.trigger
        p1 = np.where(hit, self.margin, 1.0 - self.margin)
        return np.stack([1.0 - p1, p1], axis=1)


def make_binary_dataset(X, y, k=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    bounds = np.zeros((X.shape[1], 2))
    bounds[:, 1] = 1.0
    return LabeledDataset(
        features=X,
        labels=y,
        ids=np.arange(len(y), dtype=np.int64),
        k=k if k is not None else int(y.max()) + 1,
        feature_kind=FeatureKind.BINARY,
        feature_bounds=bounds,
    )


def make_continuous_dataset(X, y, k=None, lo=0.0, hi=1.0):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    bounds = np.zeros((X.shape[1], 2))
    bounds[:, 0] = lo
    bounds[:, 1] = hi
    return LabeledDataset(
        features=X,
        labels=y,
        ids=np.arange(len(y), dtype=np.int64),
        k=k if k is not None else int(y.max()) + 1,
        feature_kind=FeatureKind.CONTINUOUS,
        feature_bounds=bounds,
    )


@pytest.fixture
def xor_dataset():
    rng = np.random.default_rng(0)
    base = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.float64)
    X = np.repeat(base, 50, axis=0)
    y = (X[:, 0].astype(int) ^ X[:, 1].astype(int)).astype(np.int64)
    X = X + rng.normal(0.0, 0.05, X.shape)
    return make_continuous_dataset(X, y, lo=float(X.min()), hi=float(X.max()))


def sample_of(features, sid=0):
    return Sample(id=sid, features=np.asarray(features, dtype=np.float64))


def numeric_grad(f, arr, h=1e-6):
    """Central finite differences of scalar f() w.r.t. arr, in place."""
    g = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    while not it.finished:
        i = it.multi_index
        old = arr[i]
        arr[i] = old + h
        up = f()
        arr[i] = old - h
        down = f()
        arr[i] = old
        g[i] = (up - down) / (2 * h)
        it.iternext()
    return g


def rel_err(a, b):
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / denom

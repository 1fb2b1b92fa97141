"""Black-box local surrogate explainer.

Explanations come from a ridge-regularized weighted linear fit over random
zeroing perturbations of one sample: each perturbation keeps or zeroes every
feature independently, the black-box is queried for class probabilities, and
proximity weighting favors perturbations close to the original sample. The
fitted coefficients are per-class feature weights whose sign gives the
feature's direction (toward / away from / neutral to) each class.

Binary classification uses one fit for class 1; class-0 weights are its exact
negation (complement convention).
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dataset import Sample, PerturbationRecord
from .errors import InvalidConfig, ShapeMismatch, SingularSystem
from .models import PredictionModel
from .rng import rng_for

SHAPLEY_ENDPOINT_WEIGHT = 1e6  # finite cap for the all-kept / all-zeroed masks


class Direction(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class ExplainConfig:
    """num_perturbations and kernel_width resolve to size-based defaults when 0:
    l = max(2000, 10 d) and width = 0.75 sqrt(d)."""

    num_perturbations: int = 0
    kernel: str = "exponential"  # exponential | shapley
    kernel_width: float = 0.0
    eps_neutral: float = 1e-9
    seed: int = 0
    ridge: float = 1e-6

    def validate(self):
        if self.kernel not in ("exponential", "shapley"):
            raise InvalidConfig(f"unknown kernel {self.kernel!r}")
        if self.num_perturbations < 0 or self.kernel_width < 0:
            raise InvalidConfig("num_perturbations and kernel_width must be >= 0 (0 = auto)")
        if self.eps_neutral < 0 or not math.isfinite(self.eps_neutral):
            raise InvalidConfig("eps_neutral must be finite and >= 0")
        if self.ridge < 0:
            raise InvalidConfig("ridge must be >= 0")

    def resolved(self, d: int) -> tuple:
        """(l, width) for dimensionality d; enforces l >= d + 2."""
        self.validate()
        l = self.num_perturbations if self.num_perturbations else max(2000, 10 * d)
        if l < d + 2:
            raise InvalidConfig(f"num_perturbations={l} < d+2={d + 2}: system underdetermined")
        width = self.kernel_width if self.kernel_width else 0.75 * math.sqrt(d)
        return l, width


@dataclass(frozen=True)
class ExplanationSet:
    """Per-class feature weights for one sample; weights[i][j] points feature j
    toward class i when positive."""

    sample_id: int
    weights: np.ndarray  # (k, d)
    intercepts: np.ndarray  # (k,)

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def d(self):
        return self.weights.shape[1]

    def to_dict(self) -> dict:
        return {
            "sample_id": int(self.sample_id),
            "k": int(self.k),
            "d": int(self.d),
            "weights": [[float(v) for v in row] for row in self.weights],
            "intercepts": [float(v) for v in self.intercepts],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ExplanationSet":
        return cls(
            sample_id=int(obj["sample_id"]),
            weights=np.asarray(obj["weights"], dtype=np.float64),
            intercepts=np.asarray(obj["intercepts"], dtype=np.float64),
        )


def sample_local_perturbations(x: Sample, l: int, seed: int, salt: int = 0):
    """Draw l keep/zero masks around x; bit j = 1 keeps feature j, 0 zeroes it.

    Mask 0 is always all-ones (the sample itself); the rest keep each feature
    independently with probability 0.5. Returns (masks, Z) where Z = masks * x.
    """
    if l < 1:
        raise InvalidConfig("need at least one perturbation")
    d = x.d
    rng = rng_for(seed, x.id, salt)
    masks = (rng.random((l, d)) < 0.5).astype(np.float64)
    masks[0, :] = 1.0
    return masks, masks * x.features


def kernel_weight(mask, kind: str, width: float) -> float:
    """Proximity weight of one mask; see kernel_weights for the batch form."""
    mask = np.asarray(mask, dtype=np.float64)
    return float(kernel_weights(mask[None, :], kind, width)[0])


def kernel_weights(masks: np.ndarray, kind: str, width: float) -> np.ndarray:
    """Exponential: exp(-(d-s)^2 / width^2) with s = kept count. Shapley:
    (d-1) / (C(d,s) s (d-s)) with the endpoint masks capped at a large
    finite weight instead of the singular exact value."""
    d = masks.shape[1]
    s = masks.sum(axis=1).astype(np.int64)
    if kind == "exponential":
        if width <= 0:
            raise InvalidConfig("exponential kernel needs width > 0")
        miss = (d - s).astype(np.float64)
        return np.exp(-(miss * miss) / (width * width))
    if kind != "shapley":
        raise InvalidConfig(f"unknown kernel {kind!r}")
    table = np.empty(d + 1)
    table[0] = table[d] = SHAPLEY_ENDPOINT_WEIGHT
    for sz in range(1, d):
        table[sz] = (d - 1) / (math.comb(d, sz) * sz * (d - sz))
    return table[s]


def fit_weighted_linear(masks, targets, weights, ridge):
    """Solve the weighted ridge normal equations; returns (coefficients, intercept).

    The intercept is not penalized. Raises SingularSystem when the system
    cannot be solved (possible only with ridge == 0 and collinear masks).
    """
    coefs, intercepts = _fit_weighted_multi(
        np.asarray(masks, dtype=np.float64),
        np.asarray(targets, dtype=np.float64)[:, None],
        np.asarray(weights, dtype=np.float64),
        ridge,
    )
    return coefs[0], float(intercepts[0])


def _fit_weighted_multi(X, T, w, ridge):
    """One factorization, many targets: X (l, d), T (l, m) -> ((m, d), (m,))."""
    l, d = X.shape
    Xw = X * w[:, None]
    A = np.empty((d + 1, d + 1))
    A[:d, :d] = X.T @ Xw
    A[:d, :d] += ridge * np.eye(d)
    col = Xw.sum(axis=0)
    A[:d, d] = col
    A[d, :d] = col
    A[d, d] = w.sum()
    rhs = np.empty((d + 1, T.shape[1]))
    rhs[:d, :] = X.T @ (T * w[:, None])
    rhs[d, :] = (T * w[:, None]).sum(axis=0)
    try:
        theta = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"weighted least squares failed: {exc}") from None
    if not np.all(np.isfinite(theta)):
        raise SingularSystem("weighted least squares produced non-finite coefficients")
    return theta[:d, :].T, theta[d, :]


def explain(model: PredictionModel, x: Sample, cfg: ExplainConfig, salt: int = 0) -> ExplanationSet:
    """Fit the local surrogate around x and return per-class feature weights.

    Targets are the model's class probabilities at each perturbation. salt
    separates RNG streams when the same sample id is explained for different
    purposes (e.g. attack guidance vs. diagnosis).
    """
    if x.d != model.d:
        raise ShapeMismatch(f"sample d={x.d} but model d={model.d}")
    l, width = cfg.resolved(x.d)
    masks, Z = sample_local_perturbations(x, l, cfg.seed, salt)
    pw = kernel_weights(masks, cfg.kernel, width)
    probs = model.predict_proba_batch(Z)
    if model.k == 2:
        coefs, intercepts = _fit_weighted_multi(masks, probs[:, 1:2], pw, cfg.ridge)
        w1, b1 = coefs[0], float(intercepts[0])
        weights = np.stack([-w1, w1])
        inter = np.array([1.0 - b1, b1])
    else:
        coefs, intercepts = _fit_weighted_multi(masks, probs, pw, cfg.ridge)
        weights = coefs
        inter = intercepts
    return ExplanationSet(sample_id=x.id, weights=weights, intercepts=inter)


def direction(w: float, eps_neutral: float) -> Direction:
    """Neutral iff |w| <= eps_neutral, else the sign decides."""
    if abs(w) <= eps_neutral:
        return Direction.NEUTRAL
    return Direction.POSITIVE if w > 0 else Direction.NEGATIVE


def direction_counts(expl: ExplanationSet, rec: PerturbationRecord, class_idx: int, eps_neutral: float):
    """(positive, negative, neutral) counts over the record's perturbed features
    toward class_idx; the three always sum to the perturbation count."""
    idx = rec.perturbed_indices
    if idx.size and (idx.max() >= expl.d or idx.min() < 0):
        raise ShapeMismatch("perturbed index out of range for explanation")
    w = expl.weights[class_idx][idx]
    pos = int(np.sum(w > eps_neutral))
    neg = int(np.sum(w < -eps_neutral))
    return pos, neg, int(idx.size) - pos - neg

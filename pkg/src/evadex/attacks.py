"""Feature-space evasion strategies.

Three strategies produce perturbation records for diagnosis:

* additive flips: greedy (or seeded-random) 0->1 flips on binary features
  until the label flips or the budget runs out;
* bounded noise: uniform noise on low-valued "background" features of
  continuous data, applied in batches between queries;
* guided: either base strategy restricted to candidates selected from a
  pre-attack surrogate explanation.

For the noise base, guidance keeps features whose weight points toward the
true label (perturbing them erodes its support). Zeroing perturbations carry
no information about features already at zero (their fitted weight is pure
sampling noise), so for the additive base the guidance explains a probe with
every absent feature switched on and keeps the ones whose presence would
point away from the true label.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import FeatureKind, LabeledDataset, PerturbationRecord, Sample
from .errors import (
    EmptyCandidateSet,
    EmptyDataset,
    EvadexError,
    InvalidConfig,
    NoBackgroundFeatures,
)
from .explain import ExplainConfig, explain
from .models import PredictionModel
from .rng import rng_for

EVADED = "evaded"
BUDGET_EXHAUSTED = "budget_exhausted"
ALREADY_MISCLASSIFIED = "already_misclassified"
ERROR = "error"


@dataclass(frozen=True)
class AttackConfig:
    strategy: str = "additive"  # additive | noise | guided
    budget: int = 10
    noise_scale: float = 0.2
    background_threshold: float = 0.1
    seed: int = 0
    order: str = "greedy"  # greedy | random flip ordering for the additive base
    guided_base: str = "additive"
    explain_cfg: ExplainConfig = ExplainConfig()

    def validate(self, d: int):
        if self.strategy not in ("additive", "noise", "guided"):
            raise InvalidConfig(f"unknown strategy {self.strategy!r}")
        if self.order not in ("greedy", "random"):
            raise InvalidConfig(f"unknown order {self.order!r}")
        if self.guided_base not in ("additive", "noise"):
            raise InvalidConfig(f"unknown guided_base {self.guided_base!r}")
        if self.budget < 1:
            raise InvalidConfig("budget must be >= 1")
        if self.budget > d:
            raise InvalidConfig(f"budget {self.budget} exceeds feature count {d}")
        if self.noise_scale <= 0:
            raise InvalidConfig("noise_scale must be > 0")


@dataclass(frozen=True)
class AttackOutcome:
    record: PerturbationRecord
    queries: int
    status: str

    def to_dict(self) -> dict:
        out = self.record.to_dict()
        out["status"] = self.status
        out["queries"] = int(self.queries)
        return out


@dataclass(frozen=True)
class AttackFailure:
    """Per-sample attack error inside a campaign (e.g. no candidates)."""

    sample_id: int
    original_label: int
    error: str

    def to_dict(self) -> dict:
        return {
            "sample_id": int(self.sample_id),
            "status": ERROR,
            "error": self.error,
            "original_label": int(self.original_label),
        }


def entry_from_dict(obj: dict):
    if obj.get("status") == ERROR:
        return AttackFailure(
            sample_id=int(obj["sample_id"]),
            original_label=int(obj["original_label"]),
            error=str(obj.get("error", "")),
        )
    rec = PerturbationRecord.from_dict(obj)
    return AttackOutcome(record=rec, queries=int(obj["queries"]), status=str(obj["status"]))


def _empty_outcome(x, y_true, pred, queries, status):
    rec = PerturbationRecord(
        sample_id=x.id,
        perturbed_indices=np.empty(0, np.int64),
        deltas=np.empty(0, np.float64),
        evasive=False,
        original_label=int(y_true),
        adversarial_label=int(pred),
    )
    return AttackOutcome(record=rec, queries=queries, status=status)


def additive_flip_attack(
    model: PredictionModel,
    x: Sample,
    y_true: int,
    cfg: AttackConfig,
    kind: FeatureKind,
    candidates=None,
    rng=None,
    initial_label=None,
) -> AttackOutcome:
    """Flip 0-valued features to 1 until the prediction leaves y_true.

    Greedy order queries the model once per remaining candidate each step and
    takes the flip that most reduces the true-class probability; random order
    flips a seeded shuffle one feature at a time.
    """
    if kind is not FeatureKind.BINARY:
        raise InvalidConfig("additive flips require a binary dataset")
    cfg.validate(x.d)
    rng = rng if rng is not None else rng_for(cfg.seed, x.id)
    queries = 0
    if initial_label is None:
        initial_label = model.predict(x.features)
        queries += 1
    if initial_label != y_true:
        return _empty_outcome(x, y_true, initial_label, max(queries, 1), ALREADY_MISCLASSIFIED)

    current = x.features.copy()
    cand = np.flatnonzero(current == 0.0)
    if candidates is not None:
        cand = np.intersect1d(cand, np.asarray(candidates, dtype=np.int64))
    flipped, deltas = [], []
    label = int(y_true)
    if cfg.order == "random":
        cand = rng.permutation(cand)
    while cand.size and len(flipped) < cfg.budget and label == y_true:
        if cfg.order == "greedy":
            batch = np.repeat(current[None, :], cand.size, axis=0)
            batch[np.arange(cand.size), cand] = 1.0
            probs = model.predict_proba_batch(batch)
            queries += cand.size
            pick = int(np.argmin(probs[:, y_true]))
            j = int(cand[pick])
            label = int(np.argmax(probs[pick]))
            cand = np.delete(cand, pick)
            current[j] = 1.0
        else:
            j = int(cand[0])
            cand = cand[1:]
            current[j] = 1.0
            queries += 1
            label = int(np.argmax(model.predict_proba(current)))
        flipped.append(j)
        deltas.append(1.0)
    evaded = label != y_true
    rec = PerturbationRecord(
        sample_id=x.id,
        perturbed_indices=np.asarray(flipped, dtype=np.int64),
        deltas=np.asarray(deltas, dtype=np.float64),
        evasive=evaded,
        original_label=int(y_true),
        adversarial_label=label,
    )
    return AttackOutcome(record=rec, queries=max(queries, 1), status=EVADED if evaded else BUDGET_EXHAUSTED)


def bounded_noise_attack(
    model: PredictionModel,
    x: Sample,
    y_true: int,
    cfg: AttackConfig,
    bounds: np.ndarray,
    candidates=None,
    rng=None,
    initial_label=None,
) -> AttackOutcome:
    """Add uniform noise in (0, noise_scale] to background features (value at or
    below background_threshold), one seeded batch per query, clamped to bounds."""
    cfg.validate(x.d)
    span = float(np.max(bounds[:, 1] - bounds[:, 0])) if bounds.size else 0.0
    if cfg.noise_scale > span:
        raise InvalidConfig(f"noise_scale {cfg.noise_scale} exceeds feature bounds span {span}")
    rng = rng if rng is not None else rng_for(cfg.seed, x.id)
    queries = 0
    if initial_label is None:
        initial_label = model.predict(x.features)
        queries += 1
    if initial_label != y_true:
        return _empty_outcome(x, y_true, initial_label, max(queries, 1), ALREADY_MISCLASSIFIED)

    cand = np.flatnonzero(x.features <= cfg.background_threshold)
    if candidates is not None:
        cand = np.intersect1d(cand, np.asarray(candidates, dtype=np.int64))
    if cand.size == 0:
        raise NoBackgroundFeatures(
            f"sample {x.id}: no feature at or below threshold {cfg.background_threshold}"
        )
    order = rng.permutation(cand)
    batch_size = max(1, x.d // 20)
    current = x.features.copy()
    perturbed, deltas = [], []
    label = int(y_true)
    pos = 0
    while pos < order.size and len(perturbed) < cfg.budget and label == y_true:
        take = min(batch_size, cfg.budget - len(perturbed), order.size - pos)
        batch = order[pos : pos + take]
        pos += take
        raw = cfg.noise_scale * (1.0 - rng.random(take))  # uniform on (0, noise_scale]
        new = np.clip(current[batch] + raw, bounds[batch, 0], bounds[batch, 1])
        eff = new - current[batch]
        current[batch] = new
        perturbed.extend(int(j) for j in batch)
        deltas.extend(float(v) for v in eff)
        probs_row = model.predict_proba(current)
        queries += 1
        label = int(np.argmax(probs_row))
    evaded = label != y_true
    rec = PerturbationRecord(
        sample_id=x.id,
        perturbed_indices=np.asarray(perturbed, dtype=np.int64),
        deltas=np.asarray(deltas, dtype=np.float64),
        evasive=evaded,
        original_label=int(y_true),
        adversarial_label=label,
    )
    return AttackOutcome(record=rec, queries=max(queries, 1), status=EVADED if evaded else BUDGET_EXHAUSTED)


def guided_feature_selection(model: PredictionModel, x: Sample, y_true: int, explain_cfg: ExplainConfig) -> np.ndarray:
    """Indices whose pre-attack weight points toward y_true, with no magnitude
    cutoff beyond the neutral band. These carry the true label's support, so
    corrupting them is the most promising destructive perturbation."""
    expl = explain(model, x, explain_cfg, salt=1)
    w = expl.weights[y_true]
    return np.flatnonzero(w > explain_cfg.eps_neutral).astype(np.int64)


def additive_guided_candidates(
    model: PredictionModel, x: Sample, y_true: int, explain_cfg: ExplainConfig, hi: np.ndarray
) -> np.ndarray:
    """Absent features whose presence would point away from y_true.

    An explanation of x itself says nothing useful about absent features
    (zeroing them is a no-op, leaving only sampling noise), so the explanation
    is taken at a probe with all absent features raised to their upper bound;
    candidates are the originally-absent features the probe marks negative
    toward the true label.
    """
    absent = np.flatnonzero(x.features == 0.0)
    if absent.size == 0:
        return absent.astype(np.int64)
    probe = x.features.copy()
    probe[absent] = hi[absent]
    expl = explain(model, Sample(id=x.id, features=probe), explain_cfg, salt=1)
    w = expl.weights[y_true][absent]
    return absent[w < -explain_cfg.eps_neutral].astype(np.int64)


def guided_attack(
    model: PredictionModel,
    x: Sample,
    y_true: int,
    cfg: AttackConfig,
    kind: FeatureKind,
    bounds: np.ndarray,
) -> AttackOutcome:
    """Run the configured base strategy restricted to explanation-selected
    candidates. Raises EmptyCandidateSet when the selection leaves nothing
    the base strategy may touch."""
    cfg.validate(x.d)
    rng = rng_for(cfg.seed, x.id)
    pred = model.predict(x.features)
    if pred != y_true:
        return _empty_outcome(x, y_true, pred, 1, ALREADY_MISCLASSIFIED)
    l_used, _ = cfg.explain_cfg.resolved(x.d)
    if cfg.guided_base == "additive":
        cand = additive_guided_candidates(model, x, y_true, cfg.explain_cfg, bounds[:, 1])
        if cand.size == 0:
            raise EmptyCandidateSet(f"sample {x.id}: guidance selected no flippable feature")
        out = additive_flip_attack(
            model, x, y_true, cfg, kind, candidates=cand, rng=rng, initial_label=y_true
        )
    else:
        sel = guided_feature_selection(model, x, y_true, cfg.explain_cfg)
        cand = np.intersect1d(sel, np.flatnonzero(x.features <= cfg.background_threshold))
        if cand.size == 0:
            raise EmptyCandidateSet(f"sample {x.id}: guidance selected no background feature")
        out = bounded_noise_attack(
            model, x, y_true, cfg, bounds, candidates=cand, rng=rng, initial_label=y_true
        )
    return replace(out, queries=out.queries + 1 + l_used)


@dataclass(frozen=True)
class CampaignResult:
    entries: tuple  # AttackOutcome | AttackFailure, sorted by sample_id
    summary: dict

    def to_dict(self) -> dict:
        return {"summary": self.summary, "outcomes": [e.to_dict() for e in self.entries]}


def _attack_one(model, data, cfg, i):
    x = data.sample(i)
    y_true = int(data.labels[i])
    rng = rng_for(cfg.seed, x.id)
    try:
        if cfg.strategy == "additive":
            return additive_flip_attack(model, x, y_true, cfg, data.feature_kind, rng=rng)
        if cfg.strategy == "noise":
            return bounded_noise_attack(model, x, y_true, cfg, data.feature_bounds, rng=rng)
        return guided_attack(model, x, y_true, cfg, data.feature_kind, data.feature_bounds)
    except EvadexError as exc:
        return AttackFailure(sample_id=x.id, original_label=y_true, error=f"{type(exc).__name__}: {exc}")


def run_attack_campaign(model: PredictionModel, data: LabeledDataset, cfg: AttackConfig, jobs: int = 1) -> CampaignResult:
    """Attack every correctly-predicted sample in the evasion set.

    Originally-misclassified samples are kept in the entry list with status
    already_misclassified but contribute no perturbations. Per-sample errors
    become error entries instead of aborting the campaign. Deterministic for a
    fixed seed regardless of jobs; entries are sorted by sample id.
    """
    if data.n == 0:
        raise EmptyDataset("campaign needs a nonempty evasion set")
    cfg.validate(data.d)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda i: _attack_one(model, data, cfg, i), range(data.n)))
    else:
        entries = [_attack_one(model, data, cfg, i) for i in range(data.n)]
    entries.sort(key=lambda e: e.sample_id if isinstance(e, AttackFailure) else e.record.sample_id)

    n = len(entries)
    n_already = sum(1 for e in entries if isinstance(e, AttackOutcome) and e.status == ALREADY_MISCLASSIFIED)
    n_evaded = sum(1 for e in entries if isinstance(e, AttackOutcome) and e.status == EVADED)
    n_errors = sum(1 for e in entries if isinstance(e, AttackFailure))
    attacked = [e for e in entries if isinstance(e, AttackOutcome) and e.status != ALREADY_MISCLASSIFIED]
    pre_acc = (n - n_already) / n
    post_acc = (n - n_already - n_evaded) / n
    summary = {
        "n_samples": n,
        "n_attacked": n - n_already,
        "n_evaded": n_evaded,
        "n_errors": n_errors,
        "pre_evasion_accuracy": pre_acc,
        "post_evasion_accuracy": post_acc,
        "aggregate_evasion": pre_acc - post_acc,
        "mean_queries": float(np.mean([e.queries for e in attacked])) if attacked else 0.0,
        "mean_perturbed": float(np.mean([e.record.n_perturbed for e in attacked])) if attacked else 0.0,
    }
    return CampaignResult(entries=tuple(entries), summary=summary)

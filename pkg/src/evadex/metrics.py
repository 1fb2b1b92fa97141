"""Correlation-diagnosis metrics linking perturbations to post-attack explanations.

Per sample: perturbation precision (pspp) is the rate of perturbed features
directed away from the original label and toward other labels; perturbation
error (pspe) is the rate directed back toward the original label. Over an
attacked set: hcr is the fraction of samples that are both evasive and have
pspp strictly above tau, and ape is the mean pspe.

All counts are restricted to the perturbed features of each record, so every
metric lives in [0, 1]. Records with zero perturbations are undefined and must
be skipped by callers; diagnose() lists them with a skip reason.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .attacks import ALREADY_MISCLASSIFIED, EVADED, AttackFailure, AttackOutcome
from .dataset import LabeledDataset, PerturbationRecord, apply_perturbation
from .errors import EmptyDataset, EvadexError, InvalidTarget, ZeroPerturbations
from .explain import ExplainConfig, ExplanationSet, direction_counts, explain
from .models import PredictionModel

DIAGNOSED = "diagnosed"
SKIPPED = "skipped"
ERROR = "error"


def _require_perturbations(rec: PerturbationRecord) -> int:
    P = rec.n_perturbed
    if P == 0:
        raise ZeroPerturbations(f"sample {rec.sample_id}: no perturbed features")
    return P


def pspp(rec: PerturbationRecord, expl: ExplanationSet, eps_neutral: float) -> float:
    """Rate of positive perturbations: the mean over non-true classes of the
    toward-that-class rate, averaged with the away-from-true rate."""
    P = _require_perturbations(rec)
    k = expl.k
    y_true = rec.original_label
    toward_others = 0.0
    for y_i in range(k):
        if y_i == y_true:
            continue
        pos_i, _, _ = direction_counts(expl, rec, y_i, eps_neutral)
        toward_others += pos_i / P
    _, neg_true, _ = direction_counts(expl, rec, y_true, eps_neutral)
    return 0.5 * (toward_others / (k - 1) + neg_true / P)


def pspe(rec: PerturbationRecord, expl: ExplanationSet, eps_neutral: float) -> float:
    """Rate of negative perturbations: perturbed features still directed toward
    the original label."""
    P = _require_perturbations(rec)
    pos_true, _, _ = direction_counts(expl, rec, rec.original_label, eps_neutral)
    return pos_true / P


def neutral_rate(rec: PerturbationRecord, expl: ExplanationSet, eps_neutral: float) -> float:
    P = _require_perturbations(rec)
    _, _, neut = direction_counts(expl, rec, rec.original_label, eps_neutral)
    return neut / P


def pspp_targeted(rec: PerturbationRecord, expl: ExplanationSet, y_target: int, eps_neutral: float) -> float:
    """Targeted precision: rate of perturbed features directed toward y_target."""
    if y_target == rec.original_label:
        raise InvalidTarget("target class equals the original label")
    P = _require_perturbations(rec)
    pos_t, _, _ = direction_counts(expl, rec, y_target, eps_neutral)
    return pos_t / P


def pspe_targeted(rec: PerturbationRecord, expl: ExplanationSet, y_target: int, eps_neutral: float) -> float:
    """Targeted error: rate of perturbed features directed away from y_target."""
    if y_target == rec.original_label:
        raise InvalidTarget("target class equals the original label")
    P = _require_perturbations(rec)
    _, neg_t, _ = direction_counts(expl, rec, y_target, eps_neutral)
    return neg_t / P


@dataclass(frozen=True)
class SampleDiagnosis:
    sample_id: int
    status: str  # diagnosed | skipped | error
    pspp: float = None
    pspe: float = None
    neutral_rate: float = None
    evasive: bool = False
    per_class_counts: tuple = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "id": int(self.sample_id),
            "pspp": None if self.pspp is None else float(self.pspp),
            "pspe": None if self.pspe is None else float(self.pspe),
            "neutral_rate": None if self.neutral_rate is None else float(self.neutral_rate),
            "evasive": bool(self.evasive),
            "status": self.status,
        }


@dataclass(frozen=True)
class DiagnosisReport:
    tau: float
    hcr: float
    ape: float
    aggregate_evasion: float
    n_samples: int  # diagnosed samples (the hcr/ape denominator)
    n_evasive: int
    samples: tuple  # SampleDiagnosis, sorted by sample id

    def to_dict(self) -> dict:
        return {
            "tau": float(self.tau),
            "hcr": float(self.hcr),
            "ape": float(self.ape),
            "aggregate_evasion": float(self.aggregate_evasion),
            "n_samples": int(self.n_samples),
            "n_evasive": int(self.n_evasive),
            "samples": [s.to_dict() for s in self.samples],
        }


def hcr(diagnoses, tau: float = 0.5, evasive_only: bool = False) -> float:
    """Fraction of diagnosed samples that are evasive with pspp strictly above
    tau. Boundary samples (pspp == tau) count as low-correlated. evasive_only
    restricts the denominator to evasive samples for sensitivity studies."""
    pool = [s for s in diagnoses if s.evasive] if evasive_only else list(diagnoses)
    if not pool:
        raise EmptyDataset("hcr over an empty diagnosis list")
    high = sum(1 for s in pool if s.evasive and s.pspp > tau)
    return high / len(pool)


def ape(diagnoses) -> float:
    """Mean perturbation error over the diagnosed samples."""
    pool = list(diagnoses)
    if not pool:
        raise EmptyDataset("ape over an empty diagnosis list")
    return sum(s.pspe for s in pool) / len(pool)


def diagnose_record(model, data, rec: PerturbationRecord, explain_cfg: ExplainConfig, eps_neutral: float) -> SampleDiagnosis:
    """Explain the perturbed sample and score one record."""
    x = data.sample_by_id(rec.sample_id)
    x_adv = apply_perturbation(x, rec, data.feature_bounds)
    expl = explain(model, x_adv, explain_cfg)
    counts = tuple(direction_counts(expl, rec, c, eps_neutral) for c in range(expl.k))
    return SampleDiagnosis(
        sample_id=rec.sample_id,
        status=DIAGNOSED,
        pspp=pspp(rec, expl, eps_neutral),
        pspe=pspe(rec, expl, eps_neutral),
        neutral_rate=neutral_rate(rec, expl, eps_neutral),
        evasive=rec.evasive,
        per_class_counts=counts,
    )


def diagnose(
    model: PredictionModel,
    data: LabeledDataset,
    entries,
    explain_cfg: ExplainConfig,
    tau: float = 0.5,
    eps_neutral: float = None,
    jobs: int = 1,
) -> DiagnosisReport:
    """Post-attack diagnosis of a campaign's entries.

    Every attacked record with at least one perturbation is explained on the
    perturbed sample and scored; zero-perturbation records are listed as
    skipped and error entries carry their reason. hcr and ape run over the
    diagnosed samples only; aggregate_evasion is the evaded fraction of all
    entries.
    """
    entries = list(entries)
    if not entries:
        raise EmptyDataset("diagnose needs at least one attack entry")
    if eps_neutral is None:
        eps_neutral = explain_cfg.eps_neutral

    def one(entry):
        if isinstance(entry, AttackFailure):
            return SampleDiagnosis(sample_id=entry.sample_id, status=ERROR, reason=entry.error)
        rec = entry.record
        if rec.n_perturbed == 0:
            why = "already_misclassified" if entry.status == ALREADY_MISCLASSIFIED else "no_perturbations"
            return SampleDiagnosis(sample_id=rec.sample_id, status=SKIPPED, evasive=rec.evasive, reason=why)
        try:
            return diagnose_record(model, data, rec, explain_cfg, eps_neutral)
        except EvadexError as exc:
            return SampleDiagnosis(
                sample_id=rec.sample_id, status=ERROR, evasive=rec.evasive, reason=f"{type(exc).__name__}: {exc}"
            )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, entries))
    else:
        rows = [one(e) for e in entries]
    rows.sort(key=lambda s: s.sample_id)
    diagnosed = [s for s in rows if s.status == DIAGNOSED]
    n_evaded = sum(
        1 for e in entries if isinstance(e, AttackOutcome) and e.status == EVADED
    )
    return DiagnosisReport(
        tau=tau,
        hcr=hcr(diagnosed, tau) if diagnosed else 0.0,
        ape=ape(diagnosed) if diagnosed else 0.0,
        aggregate_evasion=n_evaded / len(entries),
        n_samples=len(diagnosed),
        n_evasive=sum(1 for s in diagnosed if s.evasive),
        samples=tuple(rows),
    )


def write_scatter_csv(report: DiagnosisReport, path) -> None:
    """Plot data for the precision distribution: one "index,pspp,evasive" row
    per diagnosed sample."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("index,pspp,evasive\n")
        for s in report.samples:
            if s.status != DIAGNOSED:
                continue
            fh.write(f"{s.sample_id},{s.pspp!r},{int(s.evasive)}\n")

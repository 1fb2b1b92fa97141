"""evadex: feature-space evasion attacks, local surrogate explanations, and
perturbation-correlation diagnosis for small classifiers."""

from .dataset import (
    FeatureKind,
    LabeledDataset,
    PerturbationRecord,
    Sample,
    apply_perturbation,
    load_dataset_csv,
    save_dataset_csv,
    split_dataset,
)
from .explain import (
    Direction,
    ExplainConfig,
    ExplanationSet,
    direction,
    direction_counts,
    explain,
    fit_weighted_linear,
    kernel_weight,
    kernel_weights,
    sample_local_perturbations,
)
from .models import (
    LogRegModel,
    MlpModel,
    PredictionModel,
    TrainConfig,
    TreeModel,
    accuracy,
    load_model,
    save_model,
    train_logreg,
    train_mlp,
    train_model,
    train_tree,
)
from .attacks import (
    AttackConfig,
    AttackFailure,
    AttackOutcome,
    CampaignResult,
    additive_flip_attack,
    additive_guided_candidates,
    bounded_noise_attack,
    guided_attack,
    guided_feature_selection,
    run_attack_campaign,
)
from .metrics import (
    DiagnosisReport,
    SampleDiagnosis,
    ape,
    diagnose,
    hcr,
    pspe,
    pspe_targeted,
    pspp,
    pspp_targeted,
    write_scatter_csv,
)
from .synth import binary_planted, continuous_blobs
from .config import RunConfig, load_run_config

__version__ = "0.1.0"

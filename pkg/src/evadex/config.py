"""Flat run configuration: one JSON (or TOML, Python 3.11+) file whose keys are
the field names below, with CLI flags taking precedence and EVADEX_SEED as the
seed fallback."""

import json
import os
from dataclasses import dataclass, fields

from .attacks import AttackConfig
from .errors import InvalidConfig, MissingFile
from .explain import ExplainConfig
from .models import TrainConfig


@dataclass
class RunConfig:
    dataset: str = ""
    label_column: str = "label"
    feature_kind: str = "auto"
    train_fraction: float = 0.6
    evasion_fraction: float = 0.4
    model_kind: str = "logreg"
    learning_rate: float = 0.0  # 0 = per-model default
    epochs: int = 0  # 0 = per-model default
    hidden_units: tuple = (16,)
    max_depth: int = 8
    min_leaf: int = 1
    l2: float = 0.0
    strategy: str = "additive"
    budget: int = 10
    noise_scale: float = 0.2
    background_threshold: float = 0.1
    order: str = "greedy"
    guided_base: str = "additive"
    num_perturbations: int = 0  # 0 = max(2000, 10 d)
    kernel: str = "exponential"
    kernel_width: float = 0.0  # 0 = 0.75 sqrt(d)
    eps_neutral: float = 1e-9
    selection_eps: float = -1.0  # neutral band for attack guidance; -1 = eps_neutral
    ridge: float = 1e-6
    tau: float = 0.5
    seed: int = 0
    jobs: int = 1
    out: str = "out"
    model_path: str = ""

    def to_train_config(self) -> TrainConfig:
        lr = self.learning_rate
        epochs = self.epochs
        if self.model_kind == "logreg":
            lr = lr or 0.1
            epochs = epochs or 500
        elif self.model_kind == "mlp":
            lr = lr or 0.05
            epochs = epochs or 200
        else:
            lr = lr or 0.1
            epochs = epochs or 1
        return TrainConfig(
            model_kind=self.model_kind,
            learning_rate=lr,
            epochs=epochs,
            hidden_units=tuple(self.hidden_units),
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            seed=self.seed,
            l2=self.l2,
        )

    def to_explain_config(self) -> ExplainConfig:
        return ExplainConfig(
            num_perturbations=self.num_perturbations,
            kernel=self.kernel,
            kernel_width=self.kernel_width,
            eps_neutral=self.eps_neutral,
            seed=self.seed,
            ridge=self.ridge,
        )

    def to_attack_config(self) -> AttackConfig:
        guide_cfg = self.to_explain_config()
        if self.selection_eps >= 0:
            guide_cfg = ExplainConfig(
                num_perturbations=guide_cfg.num_perturbations,
                kernel=guide_cfg.kernel,
                kernel_width=guide_cfg.kernel_width,
                eps_neutral=self.selection_eps,
                seed=guide_cfg.seed,
                ridge=guide_cfg.ridge,
            )
        return AttackConfig(
            strategy=self.strategy,
            budget=self.budget,
            noise_scale=self.noise_scale,
            background_threshold=self.background_threshold,
            seed=self.seed,
            order=self.order,
            guided_base=self.guided_base,
            explain_cfg=guide_cfg,
        )


def _read_config_file(path) -> dict:
    if not os.path.isfile(path):
        raise MissingFile(f"no such config file: {path}")
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            raise InvalidConfig("TOML configs need Python 3.11+; use JSON") from None
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InvalidConfig("config file must hold a flat object")
    return obj


def load_run_config(config_path=None, overrides=None, env=None) -> RunConfig:
    """Build the run configuration: file < EVADEX_SEED < explicit overrides."""
    env = os.environ if env is None else env
    data = {}
    if config_path:
        data.update(_read_config_file(config_path))
    if "seed" not in data and env.get("EVADEX_SEED"):
        try:
            data["seed"] = int(env["EVADEX_SEED"])
        except ValueError:
            raise InvalidConfig(f"EVADEX_SEED={env['EVADEX_SEED']!r} is not an integer") from None
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfig(f"unknown config keys: {', '.join(unknown)}")
    if "hidden_units" in data:
        data["hidden_units"] = tuple(int(u) for u in data["hidden_units"])
    return RunConfig(**data)

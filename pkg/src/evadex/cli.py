"""Command-line orchestration.

Subcommands: synth, train, attack, explain, diagnose, case-study, replay.
Every run is reproducible: the config plus seed fully determine all output
bytes, including under --jobs parallelism (outputs are canonically ordered by
sample id). Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
failure.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from .attacks import AttackOutcome, entry_from_dict, run_attack_campaign
from .config import RunConfig, load_run_config
from .dataset import apply_perturbation, load_dataset_csv, save_dataset_csv, split_dataset
from .errors import EvadexError, InvalidConfig, MissingFile, NumericalError, UsageError
from .explain import explain
from .metrics import diagnose, write_scatter_csv
from .models import accuracy, load_model, save_model, train_model
from .synth import binary_planted, continuous_blobs


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _add_common(p):
    p.add_argument("--config", help="flat JSON config file; flags win over file values")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--strategy", choices=["additive", "noise", "guided"], default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--dataset", default=None, help="dataset CSV path")
    p.add_argument("--model-kind", dest="model_kind", choices=["logreg", "mlp", "tree"], default=None)
    p.add_argument("--model", dest="model_path", default=None, help="model JSON path")
    p.add_argument("--order", choices=["greedy", "random"], default=None)
    p.add_argument("--guided-base", dest="guided_base", choices=["additive", "noise"], default=None)
    p.add_argument("--noise-scale", dest="noise_scale", type=float, default=None)
    p.add_argument("--background-threshold", dest="background_threshold", type=float, default=None)
    p.add_argument("--label-column", dest="label_column", default=None)
    p.add_argument("--feature-kind", dest="feature_kind", choices=["auto", "binary", "continuous"], default=None)
    p.add_argument("--kernel", choices=["exponential", "shapley"], default=None)
    p.add_argument("--kernel-width", dest="kernel_width", type=float, default=None)
    p.add_argument("--num-perturbations", dest="num_perturbations", type=int, default=None)
    p.add_argument("--eps-neutral", dest="eps_neutral", type=float, default=None)


def _build_config(args) -> RunConfig:
    keys = (
        "seed tau strategy budget jobs out dataset model_kind model_path order guided_base "
        "noise_scale background_threshold label_column feature_kind kernel kernel_width "
        "num_perturbations eps_neutral"
    ).split()
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return load_run_config(args.config, overrides)


def _load_dataset(cfg: RunConfig):
    if not cfg.dataset:
        raise InvalidConfig("no dataset configured; pass --dataset or set it in the config file")
    return load_dataset_csv(cfg.dataset, cfg.label_column, cfg.feature_kind)


def _model_file(cfg: RunConfig) -> str:
    return cfg.model_path or os.path.join(cfg.out, "model.json")


def _ensure_out(cfg: RunConfig):
    os.makedirs(cfg.out, exist_ok=True)


def cmd_synth(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    if args.kind == "binary-planted":
        data = binary_planted(args.n, args.d, seed=cfg.seed, planted=args.planted)
    else:
        data = continuous_blobs(args.n, args.d, seed=cfg.seed, k=args.k)
    path = args.out_file or os.path.join(cfg.out, f"{args.kind.replace('-', '_')}.csv")
    save_dataset_csv(data, path, cfg.label_column)
    print(f"wrote {path} n={data.n} d={data.d} k={data.k} kind={data.feature_kind.value}")
    return 0


def cmd_train(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    data = _load_dataset(cfg)
    train, evasion = split_dataset(data, (cfg.train_fraction, cfg.evasion_fraction), cfg.seed)
    model = train_model(train, cfg.to_train_config())
    path = _model_file(cfg)
    save_model(model, path)
    pre_acc = accuracy(model, evasion)
    print(f"wrote {path}")
    print(f"pre_evasion_accuracy={pre_acc!r}")
    return 0


def _load_split_model(cfg):
    data = _load_dataset(cfg)
    train, evasion = split_dataset(data, (cfg.train_fraction, cfg.evasion_fraction), cfg.seed)
    model = load_model(_model_file(cfg), expect_d=data.d, expect_k=data.k)
    return data, train, evasion, model


def cmd_attack(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    _, _, evasion, model = _load_split_model(cfg)
    result = run_attack_campaign(model, evasion, cfg.to_attack_config(), jobs=cfg.jobs)
    path = os.path.join(cfg.out, "outcomes.json")
    _write_json(path, result.to_dict())
    s = result.summary
    print(f"wrote {path}")
    print(
        f"pre_evasion_accuracy={s['pre_evasion_accuracy']!r} "
        f"post_evasion_accuracy={s['post_evasion_accuracy']!r} "
        f"aggregate_evasion={s['aggregate_evasion']!r}"
    )
    return 0


def cmd_explain(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    data, _, evasion, model = _load_split_model(cfg)
    if args.sample_id:
        samples = [data.sample_by_id(sid) for sid in args.sample_id]
    else:
        samples = [evasion.sample(i) for i in range(min(args.limit, evasion.n))]
    ecfg = cfg.to_explain_config()
    out = [explain(model, x, ecfg).to_dict() for x in samples]
    path = os.path.join(cfg.out, "explanations.json")
    _write_json(path, out)
    print(f"wrote {path} ({len(out)} explanations)")
    return 0


def _read_entries(path):
    if not os.path.isfile(path):
        raise MissingFile(f"no such outcomes file: {path}")
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return obj.get("summary", {}), [entry_from_dict(o) for o in obj["outcomes"]]


def cmd_diagnose(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    data, _, _, model = _load_split_model(cfg)
    outcomes_path = args.outcomes or os.path.join(cfg.out, "outcomes.json")
    _, entries = _read_entries(outcomes_path)
    report = diagnose(
        model, data, entries, cfg.to_explain_config(), tau=cfg.tau, eps_neutral=cfg.eps_neutral, jobs=cfg.jobs
    )
    rpath = os.path.join(cfg.out, "report.json")
    cpath = os.path.join(cfg.out, "scatter.csv")
    _write_json(rpath, report.to_dict())
    write_scatter_csv(report, cpath)
    print(f"wrote {rpath} and {cpath}")
    print(f"hcr={report.hcr!r} ape={report.ape!r} aggregate_evasion={report.aggregate_evasion!r}")
    return 0


def run_case_study(cfg: RunConfig) -> dict:
    """Train one model, attack with the unguided base and the guided variant
    under shared seeds, diagnose both, and report the metric deltas."""
    data = _load_dataset(cfg)
    train, evasion = split_dataset(data, (cfg.train_fraction, cfg.evasion_fraction), cfg.seed)
    model = train_model(train, cfg.to_train_config())
    base_cfg = cfg.to_attack_config()
    baseline_cfg = replace(base_cfg, strategy=cfg.guided_base)
    guided_cfg = replace(base_cfg, strategy="guided")
    ecfg = cfg.to_explain_config()
    baseline = run_attack_campaign(model, evasion, baseline_cfg, jobs=cfg.jobs)
    guided = run_attack_campaign(model, evasion, guided_cfg, jobs=cfg.jobs)
    rb = diagnose(model, data, baseline.entries, ecfg, tau=cfg.tau, eps_neutral=cfg.eps_neutral, jobs=cfg.jobs)
    rg = diagnose(model, data, guided.entries, ecfg, tau=cfg.tau, eps_neutral=cfg.eps_neutral, jobs=cfg.jobs)
    deltas = {
        "post_acc_delta": guided.summary["post_evasion_accuracy"] - baseline.summary["post_evasion_accuracy"],
        "hcr_delta": rg.hcr - rb.hcr,
        "ape_delta": rg.ape - rb.ape,
    }
    return {
        "model_kind": cfg.model_kind,
        "pre_evasion_accuracy": accuracy(model, evasion),
        "baseline": {"summary": baseline.summary, "report": rb.to_dict(), "outcomes": [e.to_dict() for e in baseline.entries]},
        "guided": {"summary": guided.summary, "report": rg.to_dict(), "outcomes": [e.to_dict() for e in guided.entries]},
        "deltas": deltas,
    }


def cmd_case_study(args) -> int:
    cfg = _build_config(args)
    _ensure_out(cfg)
    result = run_case_study(cfg)
    path = os.path.join(cfg.out, "case_study.json")
    _write_json(path, result)
    d = result["deltas"]
    print(f"wrote {path}")
    print(
        f"post_acc_delta={d['post_acc_delta']!r} hcr_delta={d['hcr_delta']!r} ape_delta={d['ape_delta']!r}"
    )
    return 0


def cmd_replay(args) -> int:
    cfg = _build_config(args)
    data = _load_dataset(cfg)
    model = load_model(_model_file(cfg), expect_d=data.d, expect_k=data.k)
    outcomes_path = args.outcomes or os.path.join(cfg.out, "outcomes.json")
    _, entries = _read_entries(outcomes_path)
    checked = mismatched = 0
    for entry in entries:
        if not isinstance(entry, AttackOutcome):
            continue
        rec = entry.record
        x = data.sample_by_id(rec.sample_id)
        x_adv = apply_perturbation(x, rec, data.feature_bounds)
        pred = model.predict(x_adv)
        checked += 1
        if pred != rec.adversarial_label or (rec.evasive and pred == rec.original_label):
            mismatched += 1
            print(f"mismatch: sample {rec.sample_id} replayed {pred}, recorded {rec.adversarial_label}", file=sys.stderr)
    if mismatched:
        raise NumericalError(f"{mismatched}/{checked} records failed replay")
    print(f"replayed {checked} records: all labels reproduced")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="evadex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=["binary-planted", "continuous-blobs"], required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--k", type=int, default=3, help="class count (continuous-blobs)")
    p.add_argument("--planted", type=int, default=None, help="discriminative columns (binary-planted, default min(8, d))")
    p.add_argument("--out-file", dest="out_file", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and report pre-evasion accuracy")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="run an evasion campaign over the evasion split")
    _add_common(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("explain", help="explain samples with the local surrogate")
    p.add_argument("--sample-id", dest="sample_id", type=int, action="append", default=None)
    p.add_argument("--limit", type=int, default=1, help="explain the first N evasion samples")
    _add_common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("diagnose", help="score attack outcomes with correlation metrics")
    p.add_argument("--outcomes", default=None, help="outcomes JSON (default OUT/outcomes.json)")
    _add_common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("case-study", help="compare unguided and guided attacks end to end")
    _add_common(p)
    p.set_defaults(func=cmd_case_study)

    p = sub.add_parser("replay", help="verify outcomes reproduce their recorded labels")
    p.add_argument("--outcomes", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EvadexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()

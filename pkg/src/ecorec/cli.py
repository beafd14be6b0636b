"""Command-line entry point: gen | train | eval | recommend | ablate | sweep | stats."""

import argparse
import json
import os
import sys

from . import graph as gr
from .config import RunConfig, parse_config_file
from .data import Kind, load_dataset, split_interactions
from .errors import ConfigError, EcorecError
from .evaluate import evaluate, rank_topk
from .experiments import format_table, run_ablation, run_sweep
from .model import ModelContext, score_all, train
from .params import DEFAULT_VARIANT_GRID, load_checkpoint, save_checkpoint
from .synth import gen_synthetic

PROG = "ecorec"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Knowledge-graph + multimodal pattern recommender engine.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, text in [
        ("gen", "generate a synthetic corpus"),
        ("train", "train a model"),
        ("eval", "evaluate a trained checkpoint on the test split"),
        ("recommend", "print Top-K patterns for one region"),
        ("ablate", "train and evaluate a grid of variants"),
        ("sweep", "vary one hyperparameter"),
        ("stats", "print knowledge-graph statistics"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="path to a 'key = value' config file")
        p.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--out", help="override the output directory")
        if name == "recommend":
            p.add_argument("--region", required=True, help="region name")
            p.add_argument("--k", type=int, help="number of recommendations")
        if name == "ablate":
            p.add_argument("--variants", help="comma-separated variant codes")
        if name == "sweep":
            p.add_argument("--param", help="hyperparameter to sweep")
            p.add_argument("--values", help="comma-separated values")
    return parser


def _config_from_args(args):
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.out:
        overrides["out"] = args.out
    if getattr(args, "variants", None):
        overrides["variants"] = args.variants
    if getattr(args, "param", None):
        overrides["sweep.param"] = args.param
    if getattr(args, "values", None):
        overrides["sweep.values"] = args.values
    if getattr(args, "k", None):
        overrides["k"] = str(args.k)
    return RunConfig.build(args.command, file_values, overrides)


def _write_out(cfg, name, text):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _echo_config(cfg):
    _write_out(cfg, "resolved.cfg", cfg.resolved_text())


def _load_inputs(cfg):
    text_path = cfg.path("text_features")
    image_path = cfg.path("image_features")
    return load_dataset(
        cfg.path("triples"),
        cfg.path("interactions"),
        text_path if text_path and os.path.exists(text_path) else None,
        image_path if image_path and os.path.exists(image_path) else None,
    )


def _build_kg(dataset, cfg):
    kg = gr.build_graph(dataset.triples, dataset.vocab.n_regions,
                        dataset.vocab.n_features, dataset.n_relations)
    return gr.prune_graph(kg, cfg["min_degree"])


def _cmd_gen(cfg):
    synth = gen_synthetic(cfg.gen_config())
    os.makedirs(cfg["out"], exist_ok=True)
    synth.save(cfg.path("triples"), cfg.path("interactions"),
               cfg.path("text_features"), cfg.path("image_features"))
    synth.save_clusters(os.path.join(cfg["out"], "clusters.tsv"))
    _echo_config(cfg)
    print(f"generated {len(synth.triples)} triples, "
          f"{sum(len(v) for v in synth.positives.values())} interactions, "
          f"{synth.vocab.n_regions} regions, {synth.vocab.n_patterns} patterns")
    return 0


def _cmd_train(cfg):
    dataset = _load_inputs(cfg)
    split = split_interactions(dataset.positives, cfg["seed"])
    kg = _build_kg(dataset, cfg)
    tc = cfg.train_config()
    variant = cfg.variant()
    params, history = train(dataset, split, tc, variant, kg=kg)
    os.makedirs(cfg["out"], exist_ok=True)
    save_checkpoint(cfg.path("checkpoint"), params, tc, variant)
    _write_out(cfg, "history.json", json.dumps(history) + "\n")
    _echo_config(cfg)
    best = max(history) if history else float("nan")
    print(f"trained variant {variant.code} for {len(history)} epoch(s), "
          f"best validation F1@{tc.eval_k} = {best:.4f}")
    return 0


def _restore(cfg):
    dataset = _load_inputs(cfg)
    params, tc, variant = load_checkpoint(cfg.path("checkpoint"))
    split = split_interactions(dataset.positives, tc.seed)
    kg = _build_kg(dataset, cfg) if variant.use_spatial else None
    ctx = ModelContext.build(dataset, kg, tc, variant)
    return dataset, params, tc, variant, split, ctx


def _cmd_eval(cfg):
    _, params, _, variant, split, ctx = _restore(cfg)
    report = evaluate(split, params, ctx, cfg["k"])
    path = _write_out(cfg, "eval_report.json", report.to_json() + "\n")
    _echo_config(cfg)
    print(f"variant {variant.code}: precision@{report.k}={report.precision_at_k:.4f} "
          f"recall@{report.k}={report.recall_at_k:.4f} f1@{report.k}={report.f1_at_k:.4f} "
          f"({report.regions_evaluated} regions) -> {path}")
    return 0


def _cmd_recommend(cfg, region_name):
    dataset, params, _, _, split, ctx = _restore(cfg)
    try:
        region = dataset.vocab.lookup(Kind.REGION, region_name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    exclusions = set(split.train.get(region, set())) | set(split.validation.get(region, set()))
    scores = score_all(region, params, ctx)
    topk = rank_topk(scores, cfg["k"], exclusions)
    for p in topk:
        print(f"{dataset.vocab.name(Kind.PATTERN, p)}\t{scores[p]:.6f}")
    return 0


def _cmd_ablate(cfg):
    dataset = _load_inputs(cfg)
    split = split_interactions(dataset.positives, cfg["seed"])
    kg = _build_kg(dataset, cfg)
    codes = cfg["variants"] if cfg["variants"] else list(DEFAULT_VARIANT_GRID)
    rows = run_ablation(dataset, split, cfg.train_config(), codes, kg=kg)
    k = cfg["k"]
    table = format_table(
        ["variant", f"precision@{k}", f"recall@{k}", f"f1@{k}"], rows)
    _write_out(cfg, "ablation.txt", table)
    _echo_config(cfg)
    print(table, end="")
    return 0


def _cmd_sweep(cfg):
    dataset = _load_inputs(cfg)
    split = split_interactions(dataset.positives, cfg["seed"])
    kg = _build_kg(dataset, cfg)
    param = cfg["sweep.param"]
    raw_values = cfg["sweep.values"]
    if param in ("embedding_dim", "batch_size", "layers"):
        try:
            values = [int(v) for v in raw_values]
        except ValueError as exc:
            raise ConfigError(f"sweep.values for {param} must be integers") from exc
    else:
        values = list(raw_values)
    rows = run_sweep(dataset, split, cfg.train_config(), param, values,
                     variant=cfg.variant(), kg=kg)
    table = format_table([param, f"f1@{cfg['k']}"], rows)
    _write_out(cfg, f"sweep_{param.replace('.', '_')}.txt", table)
    _echo_config(cfg)
    print(table, end="")
    return 0


def _cmd_stats(cfg):
    dataset = _load_inputs(cfg)
    kg = gr.build_graph(dataset.triples, dataset.vocab.n_regions,
                        dataset.vocab.n_features, dataset.n_relations)
    table = format_table(
        ["", "regions", "features", "triples", "relation_types"],
        [("number", kg.n_regions, kg.n_features, kg.n_edges, kg.n_relations)])
    print(table, end="")
    min_degree = cfg["min_degree"]
    if min_degree > 1:
        pruned = gr.prune_graph(kg, min_degree)
        print(f"after pruning (min_degree={min_degree}): "
              f"features={pruned.n_features} triples={pruned.n_edges}")
    n_inter = sum(len(v) for v in dataset.positives.values())
    print(f"patterns={dataset.vocab.n_patterns} interactions={n_inter}")
    return 0


def run_command(argv):
    """Dispatch one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = _config_from_args(args)
        if args.command == "gen":
            return _cmd_gen(cfg)
        if args.command == "train":
            return _cmd_train(cfg)
        if args.command == "eval":
            return _cmd_eval(cfg)
        if args.command == "recommend":
            return _cmd_recommend(cfg, args.region)
        if args.command == "ablate":
            return _cmd_ablate(cfg)
        if args.command == "sweep":
            return _cmd_sweep(cfg)
        if args.command == "stats":
            return _cmd_stats(cfg)
        parser.print_usage(sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"{PROG}: config error: {exc}", file=sys.stderr)
        return 2
    except (EcorecError, OSError, ValueError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

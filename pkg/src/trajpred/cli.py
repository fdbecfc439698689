"""Command-line entry point: generate, train, evaluate, ablate and render."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
import torch

from .synth import SCENARIO_KINDS, generate_dataset, make_split, read_samples, write_samples
from .train import (ConstantVelocityPredictor, TrainConfig, ablation_matrix, evaluate, export_predictions,
                    run_ablation, save_checkpoint, train)

log = logging.getLogger("trajpred")


def _seed_everything(seed: int) -> None:
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)


def _load_config(path: str | None, seed: int | None) -> TrainConfig:
    config = TrainConfig.load(path) if path else TrainConfig()
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    return config


def _write_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)


def cmd_generate(args) -> int:
    samples = generate_dataset(args.n, seed=args.seed, kinds=args.kinds, max_neighbors=args.max_neighbors,
                               noise_std=args.noise_std)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    count = write_samples(samples, args.out)
    if args.split_out:
        split = make_split([s.sample_id for s in samples], tuple(args.ratios), seed=args.seed)
        _write_json(dataclasses.asdict(split), args.split_out)
    print(f"wrote {count} samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args.config, args.seed)
    _seed_everything(config.seed)
    samples = read_samples(args.data)
    model, record = train(config, samples,
                          progress=lambda e, loss: print(f"epoch {e + 1}/{config.epochs} loss {loss:.4f}"))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, args.out)
    if args.record:
        _write_json(record.to_dict(), args.record)
    print(f"saved checkpoint to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    _seed_everything(args.seed)
    samples = read_samples(args.data)
    model = ConstantVelocityPredictor() if args.checkpoint == "cv" else args.checkpoint
    report, throughput = evaluate(model, samples)
    out = {**report.to_dict(), "throughput": throughput}
    _write_json(out, args.out)
    for name, value in report.row().items():
        print(f"{name:>14}: {value:.4f}")
    print(f"{'throughput':>14}: {throughput:.1f} samples/s")
    return 0


def cmd_ablate(args) -> int:
    base = _load_config(args.config, args.seed)
    _seed_everything(base.seed)
    configs = ablation_matrix(base)
    if args.matrix:
        with open(args.matrix, encoding="utf-8") as fh:
            overrides = json.load(fh)
        configs = {name: TrainConfig.from_dict({**dataclasses.asdict(base), **o}) for name, o in overrides.items()}
    table = run_ablation(configs, read_samples(args.train_data), read_samples(args.test_data))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    if args.out.endswith(".md"):
        Path(args.out).write_text(table.to_markdown(), encoding="utf-8")
    else:
        _write_json(table.to_dict(), args.out)
    print(table.to_markdown())
    return 0


def cmd_render(args) -> int:
    _seed_everything(args.seed)
    samples = read_samples(args.data)
    if args.limit is not None:
        samples = samples[:args.limit]
    paths = export_predictions(args.checkpoint, samples, args.out_dir)
    print(f"wrote {len(paths)} images to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajpred", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=None if name in ("train", "ablate") else 0,
                       help="random seed (overrides the config file for train/ablate)")
        p.set_defaults(func=func)
        return p

    p = add("generate", cmd_generate, "synthesize scenarios into an interchange file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kinds", nargs="+", choices=SCENARIO_KINDS, default=list(SCENARIO_KINDS))
    p.add_argument("--max-neighbors", type=int, default=6)
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--split-out", help="also write a train/val/test split of the sample ids")
    p.add_argument("--ratios", type=float, nargs=3, default=(0.8, 0.1, 0.1))

    p = add("train", cmd_train, "train a model from a config file")
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--record", help="where to write the run record")

    p = add("evaluate", cmd_evaluate, "evaluate a checkpoint (or 'cv' for the baseline)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="metric report path")

    p = add("ablate", cmd_ablate, "train and evaluate the ablation matrix")
    p.add_argument("--config", help="base TrainConfig JSON")
    p.add_argument("--matrix", help="JSON mapping row name to TrainConfig overrides")
    p.add_argument("--train-data", required=True)
    p.add_argument("--test-data", required=True)
    p.add_argument("--out", required=True, help="table path (.md for markdown, otherwise JSON)")

    p = add("render", cmd_render, "write prediction overlays as PNG files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--limit", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

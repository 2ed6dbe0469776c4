"""Command-line interface.

Subcommands: ingest, synth, train, tune, evaluate, benchmark-da,
bench-kernels. ``train`` and ``tune`` run the same pipeline; the latter adds
the swarm hyperparameter search before the final training pass.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, benchmark, dataset, dragonfly, evaluation
from . import neuralnet, pipeline


def _add_pipeline_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="key = value config file")
    parser.add_argument("--data", help="override data_root from the config")
    parser.add_argument("--out", help="override output_dir from the config")
    parser.add_argument(
        "--mode", choices=pipeline.INPUT_MODES, help="override input_mode"
    )
    parser.add_argument("--seed", type=int, help="override seed")
    parser.add_argument("--epochs", type=int, help="override epochs")


def _pipeline_config(args: argparse.Namespace, skip_tuning: bool) -> pipeline.RunConfig:
    cfg = pipeline.load_config(
        args.config,
        data_root=args.data,
        output_dir=args.out,
        input_mode=args.mode,
        seed=args.seed,
        epochs=args.epochs,
    )
    if cfg.skip_tuning != skip_tuning:
        cfg.skip_tuning = skip_tuning
    return cfg


def _cmd_ingest(args: argparse.Namespace) -> int:
    manifest = dataset.scan_dataset(args.root)
    for name, count in zip(dataset.CLASS_NAMES, manifest.counts):
        print(f"{name}: {count}")
    print(f"total: {len(manifest)}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    manifest = dataset.synth_generate(args.dir, args.n, args.seed)
    print(f"wrote {len(manifest)} images under {manifest.root}")
    return 0


def _run_and_report(cfg: pipeline.RunConfig) -> int:
    result = pipeline.run_pipeline(cfg)
    if result.tuned is not None:
        print(f"tuned: learning_rate={result.tuned[0]:.6g} hidden_dim={result.tuned[1]}")
    print(f"test accuracy: {result.metrics.overall_accuracy:.4f}")
    print(f"macro F1: {result.metrics.macro_f1:.4f}")
    for name in sorted(result.files):
        print(f"wrote {result.files[name]}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    return _run_and_report(_pipeline_config(args, skip_tuning=True))


def _cmd_tune(args: argparse.Namespace) -> int:
    return _run_and_report(_pipeline_config(args, skip_tuning=False))


def _cmd_evaluate(args: argparse.Namespace) -> int:
    params = neuralnet.load_checkpoint(args.checkpoint)
    mode = pipeline.infer_input_mode(params)
    manifest = dataset.scan_dataset(args.data)
    x, y = pipeline.build_inputs(manifest, mode)
    cm, metrics, curves = pipeline.evaluate_params(params, x, y)
    paths = evaluation.export_report(metrics, cm, curves, args.out)
    print(f"input mode: {mode}")
    print(f"accuracy: {metrics.overall_accuracy:.4f}")
    print(f"macro F1: {metrics.macro_f1:.4f}")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _cmd_benchmark_da(args: argparse.Namespace) -> int:
    cfg = dragonfly.DaConfig.rastrigin_benchmark(
        seed=args.seed, dim=args.dim, pop=args.pop, max_iter=args.iters
    )
    result = dragonfly.optimize(dragonfly.rastrigin, cfg)
    print(f"initial best: {result.trace[0]:.6g}")
    print(f"final best:   {result.fitness:.6g}")
    if args.trace_out:
        out = Path(args.trace_out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write("iteration,best_fitness\n")
            for i, v in enumerate(result.trace):
                fh.write(f"{i},{v:.10g}\n")
        print(f"wrote {out}")
    return 0


def _cmd_bench_kernels(args: argparse.Namespace) -> int:
    rows = benchmark.run_benchmark(size=args.size, repeat=args.repeat)
    print(format_backend_line())
    print(benchmark.format_benchmark(rows))
    return 0


def format_backend_line() -> str:
    from . import _kernels

    return f"active kernel backend: {_kernels.BACKEND}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemlp",
        description="Lung CT texture classification pipeline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log pipeline progress"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan a dataset root and report class counts")
    p.add_argument("root", help="directory with benign/malignant/normal subdirs")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic three-class corpus")
    p.add_argument("--n", type=int, required=True, help="images per class")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("dir", help="output dataset root")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="run the pipeline without hyperparameter tuning")
    _add_pipeline_overrides(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tune", help="run the pipeline with swarm hyperparameter tuning")
    _add_pipeline_overrides(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="dataset root to evaluate on")
    p.add_argument("--out", default=".", help="directory for the report CSVs")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "benchmark-da", help="run the swarm optimizer on the Rastrigin function"
    )
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--pop", type=int, default=30)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trace-out", help="optional CSV for the best-so-far trace")
    p.set_defaults(func=_cmd_benchmark_da)

    p = sub.add_parser(
        "bench-kernels", help="compare the compiled and pure kernel backends"
    )
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--repeat", type=int, default=10)
    p.set_defaults(func=_cmd_bench_kernels)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean one-line error to the shell
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""
Command Runner
Subcommands synth, train, eval, verify, params, bench and inspect over one resolved CliConfig.
"""

import argparse
import logging
import os
from typing import Optional, Sequence

import numpy as np
import torch

from config import gc_catalog, settings
from src.analysis.benchmark import bench_scaling
from src.analysis.correlation import export_correlations, inspect_model
from src.analysis.suites import run_suites
from src.data.motion import MotionSequence, load_split, split_observed_future, write_manifest, write_mseq
from src.data.synthetic import SyntheticSpec, synth_dataset
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.config import ModelConfig
from src.model.network import build_comparison_stack, build_model
from src.model.params import correlation_storage, count_params, unit_params
from src.static_gc.convolutions import GCKind
from src.train_eval.evaluation import evaluate, evaluate_zero_velocity
from src.train_eval.trainer import train, write_loss_csv

from .config_file import CliConfig, load_cli_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_SUITE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Flat section.key=value config file')
    common.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                        help='Override one config key (repeatable)')
    common.add_argument('--out', default='.', help='Output directory')
    common.add_argument('--seed', type=int, help='Seed for model, training and data')

    parser = argparse.ArgumentParser(prog='stgc', description='Spatiotemporal graph convolutions for motion prediction')
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('synth', parents=[common], help='Write a synthetic MSEQ dataset and manifest')
    commands.add_parser('train', parents=[common], help='Train a model, write checkpoint and loss CSV')

    evaluate_cmd = commands.add_parser('eval', parents=[common], help='Per-horizon MPJPE table')
    evaluate_cmd.add_argument('--checkpoint', help='Trained model; a fresh zero-initialized model otherwise')
    evaluate_cmd.add_argument('--baseline', action='store_true', help='Evaluate the zero-velocity baseline')

    verify = commands.add_parser('verify', parents=[common], help='Run the verification suites')
    verify.add_argument('--full', action='store_true', help='Add learning, ablation, bench and determinism runs')
    verify.add_argument('--seeds', type=int, default=settings.VERIFY_SEEDS, help='Seeds per randomized suite')

    params = commands.add_parser('params', parents=[common], help='Parameter counts of a comparison stack')
    params.add_argument('--kind', default=gc_catalog.DEFAULT_GC, choices=[k.value for k in GCKind])
    params.add_argument('--J', type=int, default=25)
    params.add_argument('--T', type=int, default=35)
    params.add_argument('--C', type=int, default=64)
    params.add_argument('--units', type=int, default=7)
    params.add_argument('--r', type=int, default=settings.REDUCTION_RATE)
    params.add_argument('--model', action='store_true', help='Count the configured prediction model instead')

    commands.add_parser('bench', parents=[common], help='Forward-time scaling of STS and DSTD units')

    inspect = commands.add_parser('inspect', parents=[common], help='Export and summarize learned correlations')
    inspect.add_argument('--checkpoint', required=True)
    inspect.add_argument('--top', type=int, default=settings.INSPECT_TOP_K)
    return parser


def _thread_count(default: Optional[int]) -> Optional[int]:
    value = os.environ.get(settings.THREADS_ENV)
    if value is None:
        return default
    threads = int(value)
    if threads < 1:
        raise ValueError(f"{settings.THREADS_ENV} must be positive, got {value!r}")
    return threads


def _synthetic_spec(cfg: CliConfig, model_cfg: ModelConfig, seed: int) -> SyntheticSpec:
    preset = gc_catalog.get_dataset_preset(cfg.data.preset)
    spec = SyntheticSpec(J=model_cfg.J, K=model_cfg.K, L=model_cfg.L, fps=preset['fps'],
                         noise=cfg.data.noise, phase_lag=cfg.data.phase_lag, seed=seed)
    spec.amplitudes = tuple(cfg.data.amplitude for _ in spec.chains)
    return spec


def _dataset(cfg: CliConfig, model_cfg: ModelConfig, split: str):
    """(observed, future) pairs of a split: from the manifest, or synthesized (test uses seed + 1)."""
    if cfg.data.manifest:
        sequences = load_split(cfg.data.manifest, split)
        if not sequences:
            raise ValueError(f"manifest {cfg.data.manifest} has no {split} sequences")
        return [split_observed_future(seq, model_cfg.K, model_cfg.L) for seq in sequences]
    seed = cfg.data.seed if split == 'train' else cfg.data.seed + 1
    count = cfg.data.train_count if split == 'train' else cfg.data.test_count
    return synth_dataset(_synthetic_spec(cfg, model_cfg, seed), count)


def cmd_synth(cfg: CliConfig, args) -> int:
    entries = {'train': [], 'test': []}
    for split in entries:
        directory = os.path.join(cfg.out, split)
        os.makedirs(directory, exist_ok=True)
        for i, (observed, future) in enumerate(_dataset(cfg, cfg.model, split)):
            path = os.path.join(directory, f"seq_{i:04d}.mseq")
            write_mseq(MotionSequence(np.concatenate([observed.values, future.values], axis=1), observed.fps), path)
            entries[split].append(path)
    manifest = os.path.join(cfg.out, 'manifest.txt')
    write_manifest(entries, manifest)
    print(f"manifest={manifest}")
    print(f"train={len(entries['train'])} test={len(entries['test'])}")
    return EXIT_OK


def cmd_train(cfg: CliConfig, args) -> int:
    dataset = _dataset(cfg, cfg.model, 'train')
    model = build_model(cfg.model)
    model, history = train(model, dataset, cfg.train)
    checkpoint = os.path.join(cfg.out, 'model.pt')
    loss_csv = os.path.join(cfg.out, 'loss.csv')
    save_checkpoint(model, checkpoint)
    write_loss_csv(history, loss_csv)
    print(f"checkpoint={checkpoint}")
    print(f"loss_csv={loss_csv}")
    print(f"final_loss={history[-1].loss:.17g}")
    return EXIT_OK


def cmd_eval(cfg: CliConfig, args) -> int:
    if args.checkpoint:
        model, model_cfg = load_checkpoint(args.checkpoint)
    else:
        model_cfg = cfg.model
        model = None
    dataset = _dataset(cfg, model_cfg, 'test')
    if args.baseline:
        report = evaluate_zero_velocity(dataset, cfg.eval.horizons_ms, cfg.eval.mode)
    else:
        model = build_model(model_cfg) if model is None else model
        report = evaluate(model, dataset, cfg.eval.horizons_ms, cfg.eval.mode, cfg.eval.batch_size)
    path = os.path.join(cfg.out, 'eval.csv')
    report.write_csv(path)
    print(report.table())
    for line in report.key_values():
        print(line)
    return EXIT_OK


def cmd_verify(cfg: CliConfig, args) -> int:
    results = run_suites(full=args.full, seeds=args.seeds)
    for result in results:
        for line in result.lines():
            print(line)
    failed = [r.name for r in results if not r.passed]
    print(f"suites={len(results)} failed={len(failed)}")
    return EXIT_FAILED_SUITE if failed else EXIT_OK


def cmd_params(cfg: CliConfig, args) -> int:
    if args.model:
        report = count_params(cfg.model)
        for line in report.lines():
            print(line)
        return EXIT_OK

    kind = GCKind(args.kind)
    stack = build_comparison_stack(kind, args.J, args.T, args.C, args.units, args.r, seed=cfg.model.seed)
    report = count_params(stack)
    catalogue = gc_catalog.get_gc_config(kind.value)
    print(f"kind={kind.value} name={catalogue['name']}")
    print(f"constraints={gc_catalog.constraint_marks(kind.value) or '-'}")
    print(f"storage={catalogue['storage']} entries={correlation_storage(kind, args.J, args.T)}")
    for line in report.lines():
        print(line)
    print(f"closed_form={args.units * unit_params(kind, args.J, args.T, args.C, args.r)}")
    target = gc_catalog.get_param_target(kind.value)
    if target is not None:
        print(f"reference={target[0]:.0f} tolerance={target[1]:.0%}")
    return EXIT_OK


def cmd_bench(cfg: CliConfig, args) -> int:
    bench = cfg.bench
    report = bench_scaling(bench.frames, bench.channels, bench.batch, bench.joint_ratio, bench.repetitions,
                           bench.warmup, bench.reduction, threads=_thread_count(1), seed=cfg.model.seed)
    for path in report.write_csv(cfg.out):
        print(f"csv={path}")
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_inspect(cfg: CliConfig, args) -> int:
    model, _ = load_checkpoint(args.checkpoint)
    for summary in inspect_model(model, args.top):
        agreement = "n/a" if summary.agreement is None else f"{summary.agreement:.3f}"
        print(f"{summary.path} axis={summary.axis} prior_agreement={agreement}")
        for q, sources in enumerate(summary.top):
            print(f"    {q} <- {' '.join(str(p) for p in sources)}")
    for path in export_correlations(model, os.path.join(cfg.out, 'correlations')):
        print(f"csv={path}")
    return EXIT_OK


HANDLERS = {
    'synth': cmd_synth,
    'train': cmd_train,
    'eval': cmd_eval,
    'verify': cmd_verify,
    'params': cmd_params,
    'bench': cmd_bench,
    'inspect': cmd_inspect,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, resolve the configuration and dispatch.

    Returns:
        0 on success, 1 on errors, 2 on a failed verification suite or a usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    try:
        cfg = load_cli_config(args.command, args.config, args.set, args.out, args.seed)
        for line in cfg.resolved():
            logger.info(line)
        os.makedirs(cfg.out, exist_ok=True)
        threads = _thread_count(None)
        if threads is not None and args.command != 'bench':
            torch.set_num_threads(threads)
        return HANDLERS[args.command](cfg, args)
    except (ValueError, KeyError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR

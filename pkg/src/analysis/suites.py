"""
Verification Suites
Pass/fail wrappers around the oracles, constraint checks, gradient checks, parameter counts,
residual identities and the desk-scale learning, ablation, stacking-order, timing and
determinism experiments.
"""

import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np
import torch

from config import gc_catalog, settings
from src.data.motion import MotionSequence
from src.data.synthetic import SyntheticSpec, synth_dataset
from src.dynamic_gc.layers import DynamicSpatialGC, DynamicTemporalGC
from src.graphs.adjacency import IndexConvention
from src.model.config import ModelConfig, Variant
from src.model.network import UnitSpec, build_comparison_stack, build_model, build_unit
from src.model.params import count_params
from src.numerics.grad_check import grad_check, module_objective
from src.numerics.tensor_ops import DEFAULT_DTYPE
from src.static_gc.convolutions import GCKind, Order
from src.train_eval.evaluation import evaluate, evaluate_zero_velocity
from src.train_eval.metrics import mpjpe
from src.train_eval.trainer import TrainConfig, train, write_loss_csv

from .benchmark import bench_scaling, median_forward_seconds
from .constraints import ConstraintStatus, check_constraints
from .verification import verify_dynamic_reduction, verify_factorization, verify_std_sts_equivalence

logger = logging.getLogger(__name__)

GRADIENT_KINDS = (GCKind.S, GCKind.T, GCKind.STD, GCKind.TSD, GCKind.VSTD, GCKind.STS, GCKind.ST,
                  GCKind.DS, GCKind.DT, GCKind.DSTD, GCKind.DTSD)

# Acceptance bounds of the desk-scale experiments
LEARNING_RATIO = 0.7  # model / zero-velocity average MPJPE
ABLATION_MARGIN = 0.02  # relative gap FULL must keep below variants A and B
STACKING_GAP = 0.10  # relative DSTD vs DTSD difference
CONVERGENCE_SAMPLES = 10  # training sequences of the convergence run
CONVERGENCE_RATIO = 0.5  # final / first-epoch training loss
SLOPE_RANGE = (2.3, 3.7)
RATIO_LIMIT = 2.0
STABILITY_LIMIT = 0.20  # relative change of a median when repetitions double
REDUCTION_TOLERANCE = 1e-12
PARAM_RATIO_LIMIT = 0.35  # DSTD / STS comparison-stack parameters


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    details: List[str] = field(default_factory=list)
    seconds: float = 0.0

    def check(self, condition: bool, message: str) -> bool:
        """Record one line, marking the suite failed when the condition is false."""
        self.details.append(("ok   " if condition else "FAIL ") + message)
        if not condition:
            self.passed = False
        return condition

    def lines(self) -> List[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.2f} s)"
        return [head] + ["    " + line for line in self.details]


def _timed(name: str, body: Callable[[SuiteResult], None]) -> SuiteResult:
    result = SuiteResult(name)
    start = time.perf_counter()
    try:
        body(result)
    except Exception as e:
        logger.error(f"Suite {name} raised {type(e).__name__}: {e}")
        result.check(False, f"raised {type(e).__name__}: {e}")
    result.seconds = time.perf_counter() - start
    logger.info(f"Suite {name}: {'passed' if result.passed else 'FAILED'} in {result.seconds:.2f} s")
    return result


def _seeded_sizes(seed: int, low: int = 2, high: int = 6):
    rng = np.random.default_rng(seed)
    joints, frames = (int(v) for v in rng.integers(low, high + 1, size=2))
    channels = int(rng.integers(2, 5))
    return (joints, frames, channels), int(rng.integers(1, 3))


def suite_factorization(seeds: int = settings.VERIFY_SEEDS,
                        tolerance: float = settings.FACTORIZATION_TOLERANCE) -> SuiteResult:
    def body(result: SuiteResult):
        worst = {Order.SPATIAL_FIRST: 0.0, Order.TEMPORAL_FIRST: 0.0}
        for seed in range(seeds):
            sizes, reduction = _seeded_sizes(seed)
            for order in worst:
                worst[order] = max(worst[order], verify_factorization(seed, sizes, reduction, order=order))
        for order, deviation in worst.items():
            result.check(deviation <= tolerance,
                         f"{order.value}: max deviation {deviation:.3e} over {seeds} seeds (<= {tolerance:g})")
        identity = verify_factorization(0, (3, 4, 2), identity=True)
        result.check(identity == 0.0, f"identity parameters: deviation {identity:.3e}")
        scaled = verify_factorization(0, (3, 4, 2), scale=1e3, relative=True)
        result.check(scaled <= tolerance, f"parameters x1e3: relative deviation {scaled:.3e}")

    return _timed("factorization", body)


def suite_equivalence(seeds: int = settings.VERIFY_SEEDS, tolerance: float = settings.EQUIVALENCE_TOLERANCE,
                      witness_threshold: float = settings.WITNESS_THRESHOLD) -> SuiteResult:
    def body(result: SuiteResult):
        source, joint_temporal, vanilla = 0.0, 0.0, 0.0
        witness_seed, witness = None, 0.0
        for seed in range(seeds):
            sizes, _ = _seeded_sizes(seed, low=2, high=5)
            deviations = verify_std_sts_equivalence(seed, sizes)
            source = max(source, deviations[IndexConvention.SOURCE_FRAME])
            if deviations[IndexConvention.OUTPUT_FRAME] > witness:
                witness_seed, witness = seed, deviations[IndexConvention.OUTPUT_FRAME]
            reversed_order = verify_std_sts_equivalence(seed, sizes, order=Order.TEMPORAL_FIRST)
            joint_temporal = max(joint_temporal, reversed_order[IndexConvention.OUTPUT_JOINT_TEMPORAL])
            vanilla = max(vanilla, max(verify_std_sts_equivalence(seed, sizes, vanilla=True).values()))
        result.check(source <= tolerance, f"STD vs STS, source_frame: max deviation {source:.3e}")
        result.check(joint_temporal <= tolerance,
                     f"TSD vs STS, output_joint_temporal: max deviation {joint_temporal:.3e}")
        result.check(vanilla <= REDUCTION_TOLERANCE, f"shared adjacencies, every convention: {vanilla:.3e}")
        result.check(witness > witness_threshold,
                     f"output_frame counterexample: deviation {witness:.3e} at seed {witness_seed}")

    return _timed("equivalence", body)


def suite_constraints(seed: int = settings.SEED) -> SuiteResult:
    expectations = {
        GCKind.VSTD: {'c2': ConstraintStatus.HOLDS, 'c3': ConstraintStatus.HOLDS},
        GCKind.STD: {'c2': ConstraintStatus.VIOLATED, 'c3': ConstraintStatus.HOLDS},
        GCKind.TSD: {'c2': ConstraintStatus.VIOLATED, 'c3': ConstraintStatus.HOLDS},
        GCKind.STS: {'c2': ConstraintStatus.VIOLATED, 'c3': ConstraintStatus.HOLDS},
        GCKind.DSTD: {'c2': ConstraintStatus.VIOLATED, 'c3': ConstraintStatus.VIOLATED},
        GCKind.DTSD: {'c2': ConstraintStatus.VIOLATED, 'c3': ConstraintStatus.VIOLATED},
    }

    def body(result: SuiteResult):
        for kind, expected in expectations.items():
            report = check_constraints(kind, seed=seed)
            for name, status in expected.items():
                actual = report.results[name]
                result.check(actual.status == status, f"{kind.value}.{name}={actual.describe()}")
                if status == ConstraintStatus.VIOLATED:
                    result.check(actual.witness is not None, f"{kind.value}.{name} witness recorded")
            c1 = report.results['c1']
            result.check(c1.status == ConstraintStatus.HOLDS, f"{kind.value}.c1={c1.describe()}")
        first = check_constraints(GCKind.DSTD, seed=seed)
        second = check_constraints(GCKind.DSTD, seed=seed)
        result.check(first.lines() == second.lines(), "repeated check reports identical witnesses")
        st = check_constraints(GCKind.ST, seed=seed)
        result.check(all(r.status == ConstraintStatus.NOT_APPLICABLE for r in st.results.values()),
                     "st: every constraint not applicable")

    return _timed("constraints", body)


def suite_dynamic_reduction(seeds: int = 10, tolerance: float = REDUCTION_TOLERANCE) -> SuiteResult:
    def body(result: SuiteResult):
        worst = 0.0
        for seed in range(seeds):
            sizes, reduction = _seeded_sizes(seed)
            worst = max(worst, verify_dynamic_reduction(seed, sizes, reduction))
        result.check(worst <= tolerance, f"alpha = 0 dynamic vs static: max deviation {worst:.3e}")

    return _timed("dynamic_reduction", body)


def gradient_errors(kinds: Sequence[GCKind] = GRADIENT_KINDS, joints: int = 3, frames: int = 4,
                    channels: int = 4, reduction: int = 2, seed: int = settings.SEED) -> Dict[GCKind, float]:
    """Max relative grad_check error of one randomly initialized unit per kind."""
    errors = {}
    for kind in kinds:
        generator = torch.Generator().manual_seed(seed)
        torch.manual_seed(seed)
        unit = build_unit(kind, UnitSpec(joints, frames, channels, reduction=reduction), generator).to(DEFAULT_DTYPE)
        with torch.no_grad():
            for module in unit.modules():
                if isinstance(module, (DynamicSpatialGC, DynamicTemporalGC)):
                    module.head.alpha.fill_(0.5)
        inputs = torch.randn(2, joints, frames, channels, generator=generator, dtype=DEFAULT_DTYPE)
        objective, params = module_objective(unit, inputs, seed)
        errors[kind] = grad_check(objective, params)
    return errors


def suite_gradients(tolerance: float = settings.GRAD_TOLERANCE) -> SuiteResult:
    def body(result: SuiteResult):
        for kind, error in gradient_errors().items():
            result.check(error < tolerance, f"{kind.value}: max relative error {error:.3e}")

    return _timed("gradients", body)


def comparison_counts(joints: int = 25, frames: int = 35, channels: int = 64, units: int = 7) -> Dict[str, int]:
    """Trainable parameters of the comparison stack of every catalogued kind with a reference count."""
    counts = {}
    for kind in gc_catalog.GC_CONFIGS:
        if gc_catalog.get_param_target(kind) is None:
            continue
        stack = build_comparison_stack(GCKind(kind), joints, frames, channels, units)
        counts[kind] = count_params(stack).total
    return counts


def suite_params() -> SuiteResult:
    def body(result: SuiteResult):
        counts = comparison_counts()
        for kind, count in counts.items():
            target, tolerance = gc_catalog.get_param_target(kind)
            deviation = abs(count - target) / target
            result.check(deviation <= tolerance,
                         f"{kind}: {count} vs {target / 1e6:.2f}M (deviation {deviation:.1%}, <= {tolerance:.0%})")
        ranks = gc_catalog.PARAM_ORDER
        for smaller, larger in zip(ranks, ranks[1:]):
            top = max(counts[k] for k in smaller)
            bottom = min(counts[k] for k in larger)
            result.check(top < bottom, f"{'/'.join(smaller)} ({top}) < {'/'.join(larger)} ({bottom})")
        ratio = counts['dstd'] / counts['sts']
        result.check(ratio <= PARAM_RATIO_LIMIT, f"dstd/sts parameter ratio {ratio:.3f}")
        for joints, target in gc_catalog.FULL_MODEL_PARAMS.items():
            total = count_params(ModelConfig(J=joints)).total
            deviation = abs(total - target) / target
            result.check(deviation <= gc_catalog.FULL_MODEL_TOLERANCE,
                         f"full model J={joints}: {total} vs {target / 1e6:.2f}M (deviation {deviation:.1%})")

    return _timed("params", body)


def suite_residual(seed: int = settings.SEED) -> SuiteResult:
    def body(result: SuiteResult):
        spec = SyntheticSpec(seed=seed)
        dataset = synth_dataset(spec, 8)
        model = build_model(ModelConfig(J=spec.J, K=spec.K, L=spec.L, seed=seed))
        ours = evaluate(model, dataset)
        baseline = evaluate_zero_velocity(dataset)
        result.check(ours.per_horizon == baseline.per_horizon,
                     "zero-initialized decode equals zero-velocity at every horizon")

        values = np.zeros((2, 3, 3))
        shifted = values.copy()
        shifted[..., 0] += 1.0
        result.check(mpjpe(MotionSequence(values), MotionSequence(values)) == 0.0, "mpjpe of identical poses is 0")
        result.check(mpjpe(MotionSequence(shifted), MotionSequence(values)) == 1.0, "mpjpe of unit offset is 1")

    return _timed("residual", body)


def desk_experiment(kind: GCKind = GCKind.DSTD, variant: Variant = Variant.FULL,
                    train_count: int = settings.SYNTH_TRAIN_COUNT, test_count: int = settings.SYNTH_TEST_COUNT,
                    epochs: int = settings.EPOCHS, seed: int = settings.SEED,
                    batch_size: int = settings.BATCH_SIZE) -> Dict[str, float]:
    """
    Train one model on the synthetic train split and evaluate on the test split.

    Returns:
        {'model': average test MPJPE, 'zero_velocity': baseline average,
         'first_loss' / 'final_loss': training loss of the first and last epoch}
    """
    train_set = synth_dataset(SyntheticSpec(seed=seed), train_count)
    test_set = synth_dataset(SyntheticSpec(seed=seed + 1), test_count)
    model = build_model(ModelConfig(gc_kind=kind, variant=variant, seed=seed))
    model, history = train(model, train_set, TrainConfig(epochs=epochs, batch_size=batch_size, seed=seed))
    return {
        'model': evaluate(model, test_set).average,
        'zero_velocity': evaluate_zero_velocity(test_set).average,
        'first_loss': history[0].loss,
        'final_loss': history[-1].loss,
    }


def suite_learning(epochs: int = settings.EPOCHS, train_count: int = settings.SYNTH_TRAIN_COUNT,
                   test_count: int = settings.SYNTH_TEST_COUNT) -> SuiteResult:
    """Learning, ablation and stacking-order checks on one shared synthetic split."""
    def body(result: SuiteResult):
        runs = {}
        for label, kind, variant in (('full', GCKind.DSTD, Variant.FULL),
                                     ('a', GCKind.DSTD, Variant.A_CONSTRAINED_ONLY),
                                     ('b', GCKind.DSTD, Variant.B_DYNAMIC_ONLY),
                                     ('dtsd', GCKind.DTSD, Variant.FULL)):
            runs[label] = desk_experiment(kind, variant, train_count, test_count, epochs)
            result.details.append(f"info {label}: test MPJPE {runs[label]['model']:.4f}")
        full = runs['full']['model']
        baseline = runs['full']['zero_velocity']
        result.check(full <= LEARNING_RATIO * baseline,
                     f"full {full:.4f} <= {LEARNING_RATIO} x zero-velocity {baseline:.4f}")
        for label in ('a', 'b'):
            other = runs[label]['model']
            result.check(full <= (1.0 - ABLATION_MARGIN) * other, f"full {full:.4f} beats variant {label} {other:.4f}")
        dtsd = runs['dtsd']['model']
        gap = abs(full - dtsd) / min(full, dtsd)
        result.check(gap <= STACKING_GAP, f"dstd vs dtsd relative gap {gap:.1%}")

        small = desk_experiment(train_count=CONVERGENCE_SAMPLES, test_count=CONVERGENCE_SAMPLES, epochs=epochs)
        result.check(small['final_loss'] < CONVERGENCE_RATIO * small['first_loss'],
                     f"{CONVERGENCE_SAMPLES}-sample loss {small['first_loss']:.4f} -> {small['final_loss']:.4f}")

    return _timed("learning", body)


def suite_bench(frames: Sequence[int] = settings.BENCH_FRAMES) -> SuiteResult:
    def body(result: SuiteResult):
        report = bench_scaling(frames)
        low, high = SLOPE_RANGE
        for kind, slope in report.slopes.items():
            result.check(low <= slope <= high, f"{kind} log-log slope {slope:.3f} in [{low}, {high}]")
        result.check(report.ratio <= RATIO_LIMIT, f"dstd/sts runtime ratio {report.ratio:.3f} at T={frames[-1]}")

        t = frames[-1]
        joints = int(round(settings.BENCH_JOINT_RATIO * t))
        unit = build_comparison_stack(GCKind.DSTD, joints, t, settings.BENCH_CHANNELS, units=1)
        x = torch.randn(settings.BENCH_BATCH, joints, t, settings.BENCH_CHANNELS, dtype=DEFAULT_DTYPE)
        single = median_forward_seconds(unit, x, settings.BENCH_REPETITIONS)
        double = median_forward_seconds(unit, x, 2 * settings.BENCH_REPETITIONS)
        change = abs(double - single) / single
        # Timing stability depends on the host; reported, not enforced
        result.details.append(f"info median change with doubled repetitions {change:.1%}"
                              f" (target <= {STABILITY_LIMIT:.0%})")

    return _timed("bench", body)


def suite_determinism(epochs: int = 2, train_count: int = 16, test_count: int = 8) -> SuiteResult:
    def body(result: SuiteResult):
        with tempfile.TemporaryDirectory() as tmp:
            outputs = []
            for run in range(2):
                loss_path = os.path.join(tmp, f"loss_{run}.csv")
                train_set = synth_dataset(SyntheticSpec(), train_count)
                test_set = synth_dataset(SyntheticSpec(seed=settings.SEED + 1), test_count)
                model = build_model(ModelConfig(C=16, n_b=2, seed=settings.SEED))
                model, history = train(model, train_set, TrainConfig(epochs=epochs, batch_size=8))
                write_loss_csv(history, loss_path)
                with open(loss_path, 'rb') as f:
                    outputs.append((f.read(), evaluate(model, test_set).table()))
        result.check(outputs[0][0] == outputs[1][0], "loss CSVs byte-identical across runs")
        result.check(outputs[0][1] == outputs[1][1], "evaluation tables identical across runs")

    return _timed("determinism", body)


def run_suites(full: bool = False, seeds: int = settings.VERIFY_SEEDS) -> List[SuiteResult]:
    """Default suites; with full, the desk-scale learning, timing and determinism runs as well."""
    results = [
        suite_factorization(seeds),
        suite_equivalence(seeds),
        suite_constraints(),
        suite_dynamic_reduction(),
        suite_gradients(),
        suite_params(),
        suite_residual(),
    ]
    if full:
        previous = torch.get_num_threads()
        torch.set_num_threads(1)
        try:
            results += [suite_learning(), suite_bench(), suite_determinism()]
        finally:
            torch.set_num_threads(previous)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Failed suites: {', '.join(failed)}")
    return results

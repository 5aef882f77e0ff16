"""
Complexity Benchmark
Forward-time scaling of STS and DSTD comparison units with the joint count tied to the
sequence length, log-log slope fitting and host description.
"""

import logging
import os
import platform
import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import psutil
import torch

from config import settings
from src.model.network import build_comparison_stack
from src.numerics.tensor_ops import DEFAULT_DTYPE
from src.static_gc.convolutions import GCKind

logger = logging.getLogger(__name__)

BENCH_KINDS = (GCKind.STS, GCKind.DSTD)


@dataclass
class ScalingReport:
    timings: Dict[str, List[Tuple[int, float]]] = field(default_factory=dict)
    slopes: Dict[str, float] = field(default_factory=dict)
    ratio: float = 0.0
    host: Dict[str, object] = field(default_factory=dict)

    def lines(self) -> List[str]:
        out = [f"host.{k}={v}" for k, v in self.host.items()]
        for kind, points in self.timings.items():
            for frames, seconds in points:
                out.append(f"{kind}.T{frames}={seconds:.6e}")
            out.append(f"{kind}.slope={self.slopes[kind]:.4f}")
        out.append(f"ratio_dstd_sts={self.ratio:.4f}")
        return out

    def write_csv(self, out_dir: str) -> List[str]:
        """One `T,seconds` file per kind."""
        written = []
        for kind, points in self.timings.items():
            path = os.path.join(out_dir, f"bench_{kind}.csv")
            with open(path, 'w') as f:
                f.write("T,seconds\n")
                for frames, seconds in points:
                    f.write(f"{frames},{seconds:.17g}\n")
            written.append(path)
        return written


def host_info() -> Dict[str, object]:
    return {
        'platform': platform.platform(),
        'processor': platform.processor() or platform.machine(),
        'physical_cores': psutil.cpu_count(logical=False),
        'logical_cores': psutil.cpu_count(logical=True),
        'memory_gb': round(psutil.virtual_memory().total / 2 ** 30, 1),
        'torch_threads': torch.get_num_threads(),
        'torch': torch.__version__,
    }


def _time_once(module: torch.nn.Module, x: torch.Tensor, inner: int) -> float:
    start = time.perf_counter()
    for _ in range(inner):
        module(x)
    return (time.perf_counter() - start) / inner


def median_forward_seconds(module: torch.nn.Module, x: torch.Tensor,
                           repetitions: int = settings.BENCH_REPETITIONS,
                           warmup: int = settings.BENCH_WARMUP,
                           min_seconds: float = settings.BENCH_MIN_SECONDS,
                           max_inner: int = settings.BENCH_MAX_INNER) -> float:
    """
    Median per-forward time over `repetitions` measurements after `warmup` runs.

    Each measurement averages an inner loop that doubles until it lasts at least min_seconds
    or reaches max_inner.
    """
    with torch.no_grad():
        for _ in range(warmup):
            module(x)
        inner = 1
        while inner < max_inner and _time_once(module, x, inner) * inner < min_seconds:
            inner *= 2
        samples = [_time_once(module, x, inner) for _ in range(repetitions)]
    return float(np.median(samples))


def fit_slope(frames: Sequence[int], seconds: Sequence[float]) -> float:
    """Slope of log(seconds) against log(T)."""
    return float(np.polyfit(np.log(np.asarray(frames, dtype=np.float64)),
                            np.log(np.asarray(seconds, dtype=np.float64)), 1)[0])


def bench_scaling(frames: Sequence[int] = settings.BENCH_FRAMES, channels: int = settings.BENCH_CHANNELS,
                  batch: int = settings.BENCH_BATCH, joint_ratio: float = settings.BENCH_JOINT_RATIO,
                  repetitions: int = settings.BENCH_REPETITIONS, warmup: int = settings.BENCH_WARMUP,
                  reduction: int = settings.REDUCTION_RATE, threads: int = 1,
                  seed: int = settings.SEED) -> ScalingReport:
    """
    Time one STS unit and one DSTD unit for every T with J = round(joint_ratio * T).

    Args:
        frames: Increasing sequence lengths, at least four
        channels: Feature width C
        batch: Samples per forward
        joint_ratio: J / T
        repetitions: Timed measurements per point (median reported)
        warmup: Untimed runs per point
        reduction: Reduction rate of the DSTD heads
        threads: torch intra-op threads during the benchmark
        seed: Parameter and input seed

    Returns:
        ScalingReport
    """
    frames = list(frames)
    if len(frames) < 4 or any(b <= a for a, b in zip(frames, frames[1:])):
        raise ValueError(f"benchmark needs at least 4 increasing frame counts, got {frames}")

    previous_threads = torch.get_num_threads()
    torch.set_num_threads(threads)
    try:
        report = ScalingReport(host=host_info())
        generator = torch.Generator().manual_seed(seed)
        for kind in BENCH_KINDS:
            points = []
            for t in frames:
                joints = max(1, int(round(joint_ratio * t)))
                unit = build_comparison_stack(kind, joints, t, channels, units=1, reduction=reduction, seed=seed)
                x = torch.randn(batch, joints, t, channels, generator=generator, dtype=DEFAULT_DTYPE)
                seconds = median_forward_seconds(unit, x, repetitions, warmup)
                points.append((t, seconds))
                logger.info(f"bench {kind.value} T={t} J={joints}: {seconds * 1e3:.3f} ms")
            report.timings[kind.value] = points
            report.slopes[kind.value] = fit_slope([p[0] for p in points], [p[1] for p in points])
        report.ratio = report.timings[GCKind.DSTD.value][-1][1] / report.timings[GCKind.STS.value][-1][1]
    finally:
        torch.set_num_threads(previous_threads)
    return report

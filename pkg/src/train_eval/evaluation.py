"""
Horizon-Wise Evaluation
Per-horizon MPJPE tables for a model or the zero-velocity baseline.
"""

import logging
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import torch

from config import settings
from src.data.motion import HorizonError, duplicate_last_frame, ms_to_frame
from src.model.network import Model

from .metrics import mpjpe_tensor
from .trainer import Pair, stack_pairs

logger = logging.getLogger(__name__)

EVAL_MODES = ('frame', 'cumulative')


@dataclass
class EvalReport:
    per_horizon: Dict[int, float]
    average: float
    short_term: Optional[float] = None
    long_term: Optional[float] = None
    forward_seconds: float = 0.0
    mode: str = 'frame'
    frames: Dict[int, int] = field(default_factory=dict)

    def table(self) -> str:
        """Aligned text table: one header row of milliseconds, one row of errors."""
        headers = [f"{ms}" for ms in self.per_horizon] + ["avg"]
        values = [f"{v:.3f}" for v in self.per_horizon.values()] + [f"{self.average:.3f}"]
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "ms     | " + " | ".join(h.rjust(w) for h, w in zip(headers, widths))
        row = "mpjpe  | " + " | ".join(v.rjust(w) for v, w in zip(values, widths))
        return head + "\n" + row

    def key_values(self) -> List[str]:
        lines = [f"mpjpe_{ms}ms={v:.17g}" for ms, v in self.per_horizon.items()]
        lines.append(f"average={self.average:.17g}")
        if self.short_term is not None:
            lines.append(f"short_term={self.short_term:.17g}")
        if self.long_term is not None:
            lines.append(f"long_term={self.long_term:.17g}")
        lines.append(f"mode={self.mode}")
        return lines

    def write_csv(self, path: str) -> None:
        with open(path, 'w') as f:
            f.write("horizon_ms,mpjpe\n")
            for ms, value in self.per_horizon.items():
                f.write(f"{ms},{value:.17g}\n")


def horizon_frames(horizons_ms: Sequence[int], fps: float, predicted: int) -> Dict[int, int]:
    """Map each horizon to its 1-based future frame, rejecting horizons beyond the window."""
    frames = OrderedDict()
    for ms in horizons_ms:
        frame = ms_to_frame(ms, fps)
        if frame > predicted:
            raise HorizonError(f"horizon {ms} ms maps to future frame {frame}, beyond L={predicted}")
        frames[ms] = frame
    return frames


def _report(pred: torch.Tensor, truth: torch.Tensor, observed: int, frames: Dict[int, int],
            mode: str, forward_seconds: float) -> EvalReport:
    if mode not in EVAL_MODES:
        raise ValueError(f"evaluation mode must be one of {EVAL_MODES}, got {mode!r}")
    per_horizon = OrderedDict()
    for ms, frame in frames.items():
        index = observed + frame - 1
        begin = index if mode == 'frame' else observed
        per_horizon[ms] = float(mpjpe_tensor(pred[..., begin:index + 1, :], truth[..., begin:index + 1, :]))

    values = list(per_horizon.values())
    short = [v for ms, v in per_horizon.items() if ms < settings.SHORT_TERM_LIMIT_MS]
    long = [v for ms, v in per_horizon.items() if ms > settings.SHORT_TERM_LIMIT_MS]
    return EvalReport(
        per_horizon=per_horizon,
        average=sum(values) / len(values),
        short_term=sum(short) / len(short) if short else None,
        long_term=sum(long) / len(long) if long else None,
        forward_seconds=forward_seconds,
        mode=mode,
        frames=dict(frames),
    )


def evaluate(model: Model, dataset: Sequence[Pair], horizons_ms: Sequence[int] = settings.HORIZONS_MS,
             mode: str = settings.EVAL_MODE, batch_size: int = settings.BATCH_SIZE) -> EvalReport:
    """
    Per-horizon MPJPE of the model's future frames.

    Args:
        model: Prediction model
        dataset: (observed, future) pairs
        horizons_ms: Horizons in milliseconds
        mode: 'frame' for the error at the mapped frame, 'cumulative' for the mean up to it
        batch_size: Forward batch size; the reported time is per batch

    Returns:
        EvalReport
    """
    frames = horizon_frames(horizons_ms, dataset[0][0].fps, model.cfg.L)
    observed, truth = stack_pairs(dataset, model.cfg.dtype)

    model.eval()
    outputs, elapsed, iterations = [], 0.0, 0
    with torch.no_grad():
        for begin in range(0, observed.shape[0], batch_size):
            start = time.perf_counter()
            outputs.append(model(observed[begin:begin + batch_size]))
            elapsed += time.perf_counter() - start
            iterations += 1
    pred = torch.cat(outputs)
    report = _report(pred, truth, model.cfg.K, frames, mode, elapsed / iterations)
    logger.info(f"Evaluated {observed.shape[0]} sequences: average MPJPE {report.average:.4f}")
    return report


def evaluate_zero_velocity(dataset: Sequence[Pair], horizons_ms: Sequence[int] = settings.HORIZONS_MS,
                           mode: str = settings.EVAL_MODE) -> EvalReport:
    """Same table for the repeat-last-pose baseline."""
    observed_frames = dataset[0][0].frames
    predicted = dataset[0][1].frames
    frames = horizon_frames(horizons_ms, dataset[0][0].fps, predicted)
    observed, truth = stack_pairs(dataset)
    pred = duplicate_last_frame(observed, predicted)
    return _report(pred, truth, observed_frames, frames, mode, 0.0)

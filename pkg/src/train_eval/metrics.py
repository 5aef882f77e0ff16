"""
Prediction Metrics
Mean per-joint position error and the zero-velocity baseline.
"""

import logging
from typing import Optional, Tuple

import torch

from src.data.motion import MotionSequence, duplicate_last_pose

logger = logging.getLogger(__name__)


def mpjpe_tensor(pred: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """
    Mean over every leading index of the Euclidean norm along the last (coordinate) axis.

    Args:
        pred: (..., J, T, D)
        truth: same shape as pred

    Returns:
        Scalar tensor, differentiable in pred (zero error has zero gradient)
    """
    if pred.shape != truth.shape:
        raise ValueError(f"prediction {tuple(pred.shape)} and truth {tuple(truth.shape)} differ in shape")
    if pred.numel() == 0:
        raise ValueError("MPJPE over an empty range")
    return torch.linalg.vector_norm(pred - truth, dim=-1).mean()


def mpjpe(pred: MotionSequence, truth: MotionSequence, frame_range: Optional[Tuple[int, int]] = None) -> float:
    """
    MPJPE between two sequences over frames [start, stop).

    Args:
        pred: Predicted sequence
        truth: Ground-truth sequence of the same shape
        frame_range: (start, stop) frame indices; whole sequence when None
    """
    if pred.values.shape != truth.values.shape:
        raise ValueError(f"prediction {pred.values.shape} and truth {truth.values.shape} differ in shape")
    start, stop = (0, pred.frames) if frame_range is None else frame_range
    if not 0 <= start < stop <= pred.frames:
        raise ValueError(f"frame range [{start}, {stop}) is empty or outside {pred.frames} frames")
    p = torch.from_numpy(pred.values[:, start:stop])
    t = torch.from_numpy(truth.values[:, start:stop])
    return float(mpjpe_tensor(p, t))


def zero_velocity(observed: MotionSequence, predicted: int) -> MotionSequence:
    """Future frames of the repeat-last-pose predictor."""
    full = duplicate_last_pose(observed, predicted)
    return full.slice(observed.frames, observed.frames + predicted)

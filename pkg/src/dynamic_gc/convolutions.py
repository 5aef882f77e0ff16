"""
Sample-Specific Graph Convolutions
DS-GC, DT-GC and their stacked DSTD/DTSD forms. Adjustments are computed from the raw layer
input, the feature transform is applied first and aggregation follows.
"""

import logging
from typing import Tuple, Union

import torch

from src.numerics.layers import apply_transform
from src.static_gc.convolutions import Order, Transform, frame_aggregate, joint_aggregate

from .adjustment import AdjustmentHead, Axis, ConstrainedCorrelation, adjustment, update_correlation

logger = logging.getLogger(__name__)

Correlation = Union[ConstrainedCorrelation, torch.Tensor]


def dynamic_spatial_adjacency(x: torch.Tensor, c_s: Correlation, head: AdjustmentHead,
                              reversed_order: bool = False) -> torch.Tensor:
    """Effective per-sample, per-frame spatial adjacency (..., T, J, J) for input x."""
    return update_correlation(c_s, adjustment(x, head, Axis.SPATIAL), head.alpha, reversed_order)


def dynamic_temporal_adjacency(x: torch.Tensor, c_t: Correlation, head: AdjustmentHead,
                               reversed_order: bool = False) -> torch.Tensor:
    """Effective per-sample, per-joint temporal adjacency (..., J, T, T) for input x."""
    return update_correlation(c_t, adjustment(x, head, Axis.TEMPORAL), head.alpha, reversed_order)


def ds_gc(x: torch.Tensor, c_s: Correlation, head: AdjustmentHead, transform: Transform,
          reversed_order: bool = False, return_adjacency: bool = False):
    """
    Dynamic spatial GC: frame-wise aggregation of transform(x) with A^s = expand(C^s) + alpha * M^s(x).

    Args:
        x: Feature (..., J, T, C)
        c_s: Constrained spatial correlation (J, J)
        head: Spatial adjustment head
        transform: Feature transform C -> C'
        reversed_order: Use A^s = M^s + alpha * C^s
        return_adjacency: Also return the effective adjacency

    Returns:
        Feature (..., J, T, C'), optionally with A^s (..., T, J, J)
    """
    a_s = dynamic_spatial_adjacency(x, c_s, head, reversed_order)
    y = frame_aggregate(apply_transform(x, transform), a_s)
    return (y, a_s) if return_adjacency else y


def dt_gc(x: torch.Tensor, c_t: Correlation, head: AdjustmentHead, transform: Transform,
          reversed_order: bool = False, return_adjacency: bool = False):
    """Dynamic temporal GC, the mirror of ds_gc: joint-wise aggregation with A^t = expand(C^t) + alpha * M^t(x)."""
    a_t = dynamic_temporal_adjacency(x, c_t, head, reversed_order)
    y = joint_aggregate(apply_transform(x, transform), a_t)
    return (y, a_t) if return_adjacency else y


def dstd_gc(x: torch.Tensor, c_s: Correlation, head_s: AdjustmentHead, map1: Transform,
            c_t: Correlation, head_t: AdjustmentHead, map2: Transform,
            order: Order = Order.SPATIAL_FIRST,
            return_adjacency: bool = False) -> Union[torch.Tensor, Tuple[torch.Tensor, torch.Tensor, torch.Tensor]]:
    """
    Stacked dynamic GC. SPATIAL_FIRST gives DSTD-GC, dt_gc(ds_gc(x)); TEMPORAL_FIRST gives DTSD-GC.

    map1 is the transform of the first stage and map2 of the second, whichever axis comes first.
    With return_adjacency the effective (A^s, A^t) actually used are returned alongside the output.
    """
    if order == Order.SPATIAL_FIRST:
        hidden, a_s = ds_gc(x, c_s, head_s, map1, return_adjacency=True)
        y, a_t = dt_gc(hidden, c_t, head_t, map2, return_adjacency=True)
    else:
        hidden, a_t = dt_gc(x, c_t, head_t, map1, return_adjacency=True)
        y, a_s = ds_gc(hidden, c_s, head_s, map2, return_adjacency=True)
    return (y, a_s, a_t) if return_adjacency else y

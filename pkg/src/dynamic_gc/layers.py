"""
Dynamic GC Layers
DS-GC and DT-GC as modules: constrained correlation, adjustment head and feature transform.
"""

import logging

import torch
import torch.nn as nn

from src.numerics.layers import LinearMap

from .adjustment import AdjustmentHead, Axis, ConstrainedCorrelation
from .convolutions import ds_gc, dt_gc, dynamic_spatial_adjacency, dynamic_temporal_adjacency

logger = logging.getLogger(__name__)


class _DynamicGC(nn.Module):
    axis = None

    def __init__(self, correlation: torch.Tensor, joints: int, frames: int, in_channels: int,
                 out_channels: int, reduction: int = 32, trainable_correlation: bool = True,
                 alpha_init: float = 0.0, trainable_alpha: bool = True, reversed_order: bool = False):
        """
        Args:
            correlation: Initial constrained correlation, (J, J) spatial or (T, T) temporal
            joints: Joint count J
            frames: Frame count T
            in_channels: Input width C
            out_channels: Output width C'
            reduction: Reduction rate r of the adjustment head
            trainable_correlation: False freezes C at its initial value
            alpha_init: Initial adjustment intensity
            trainable_alpha: False freezes alpha at alpha_init
            reversed_order: Use A = M + alpha * C
        """
        super().__init__()
        dtype = correlation.dtype
        self.correlation = ConstrainedCorrelation(correlation, trainable=trainable_correlation)
        self.head = AdjustmentHead(in_channels, joints, frames, self.axis, reduction,
                                   alpha_init=alpha_init, dtype=dtype)
        self.head.alpha.requires_grad_(trainable_alpha)
        self.transform = LinearMap(in_channels, out_channels, dtype=dtype)
        self.reversed_order = reversed_order


class DynamicSpatialGC(_DynamicGC):
    """DS-GC layer."""
    axis = Axis.SPATIAL

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return ds_gc(x, self.correlation, self.head, self.transform, self.reversed_order)

    def effective_adjacency(self, x: torch.Tensor) -> torch.Tensor:
        return dynamic_spatial_adjacency(x, self.correlation, self.head, self.reversed_order)


class DynamicTemporalGC(_DynamicGC):
    """DT-GC layer."""
    axis = Axis.TEMPORAL

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return dt_gc(x, self.correlation, self.head, self.transform, self.reversed_order)

    def effective_adjacency(self, x: torch.Tensor) -> torch.Tensor:
        return dynamic_temporal_adjacency(x, self.correlation, self.head, self.reversed_order)

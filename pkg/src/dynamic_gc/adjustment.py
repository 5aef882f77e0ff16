"""
Constrained Dynamic Correlation Modeling
Sample-specific adjustments of a trained shared correlation: A = expand(C) + alpha * M(X).
"""

import logging
import math
from enum import Enum
from typing import Tuple, Union

import torch
import torch.nn as nn

from src.numerics.layers import MLP, LinearMap
from src.numerics.tensor_ops import DEFAULT_DTYPE, ShapeError, linear_apply, prelu

logger = logging.getLogger(__name__)


class Axis(Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"


class ConstrainedCorrelation(nn.Module):
    """Trained vanilla correlation C^s (J x J) or C^t (T x T), shared by all samples."""

    def __init__(self, init: torch.Tensor, trainable: bool = True):
        super().__init__()
        if init.dim() != 2 or init.shape[0] != init.shape[1]:
            raise ShapeError(f"constrained correlation must be a square matrix, got {tuple(init.shape)}")
        self.value = nn.Parameter(init.detach().clone(), requires_grad=trainable)
        self.register_buffer('initial', init.detach().clone())

    @property
    def trainable(self) -> bool:
        return self.value.requires_grad

    def forward(self) -> torch.Tensor:
        return self.value


def correlation_tensor(correlation: Union[ConstrainedCorrelation, torch.Tensor]) -> torch.Tensor:
    if isinstance(correlation, ConstrainedCorrelation):
        return correlation.value
    return correlation


class AdjustmentHead(nn.Module):
    """
    theta/phi compact projections, pairwise MLP and scalar intensity alpha.

    The spatial head scores joint pairs from J x (T * c) compact features and emits T values per
    pair; the temporal head scores frame pairs from T x (J * c) compact features and emits J values.
    """

    def __init__(self, channels: int, joints: int, frames: int, axis: Axis, reduction: int = 32,
                 alpha_init: float = 0.0, dtype: torch.dtype = DEFAULT_DTYPE):
        """
        Args:
            channels: Input feature width C
            joints: Joint count J
            frames: Frame count T
            axis: SPATIAL or TEMPORAL
            reduction: Reduction rate r; compact width is ceil(C / r)
            alpha_init: Initial adjustment intensity
            dtype: Parameter precision
        """
        super().__init__()
        if reduction < 1:
            raise ShapeError(f"reduction rate must be positive, got {reduction}")
        self.channels = channels
        self.joints = joints
        self.frames = frames
        self.axis = axis
        self.reduction = reduction
        self.compact_channels = max(1, math.ceil(channels / reduction))

        # Spatial: pairs of joints, T values each. Temporal: pairs of frames, J values each.
        self.output_extent = frames if axis == Axis.SPATIAL else joints
        pair_width = 2 * self.output_extent * self.compact_channels

        self.theta = LinearMap(channels, self.compact_channels, dtype=dtype)
        self.phi = LinearMap(channels, self.compact_channels, dtype=dtype)
        self.mlp = MLP([pair_width, self.output_extent, self.output_extent], dtype=dtype)
        self.alpha = nn.Parameter(torch.tensor(float(alpha_init), dtype=dtype))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return adjustment(x, self, self.axis)


def compact_project(x: torch.Tensor, head: AdjustmentHead,
                    axis: Axis = None) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Squeeze one axis into the channel dimension after the theta/phi projections.

    Args:
        x: Feature (..., J, T, C)
        head: Adjustment head
        axis: SPATIAL gives (..., J, T*c) rows per joint; TEMPORAL gives (..., T, J*c) rows per frame

    Returns:
        (theta compact, phi compact); spatial entry (j, t*c + k) equals theta(x)[j, t, k]
    """
    axis = head.axis if axis is None else axis
    if x.dim() < 3 or x.shape[-3:] != (head.joints, head.frames, head.channels):
        raise ShapeError(
            f"adjustment head expects (..., {head.joints}, {head.frames}, {head.channels}), got {tuple(x.shape)}"
        )
    theta = linear_apply(x, head.theta)
    phi = linear_apply(x, head.phi)
    if axis == Axis.TEMPORAL:
        theta = theta.transpose(-3, -2)
        phi = phi.transpose(-3, -2)
    rows = theta.shape[-3]
    width = theta.shape[-2] * theta.shape[-1]
    return theta.reshape(*theta.shape[:-3], rows, width), phi.reshape(*phi.shape[:-3], rows, width)


def adjustment(x: torch.Tensor, head: AdjustmentHead, axis: Axis = None) -> torch.Tensor:
    """
    Sample-specific adjustment M from pairwise concatenation [theta row p, phi row q] through the MLP.

    The first MLP layer acting on a concatenation is split into its theta and phi halves, so the
    (rows x rows x 2L) concatenation is never materialized; values are unchanged.

    Returns:
        Spatial: (..., T, J, J) with M[t, p, q]; temporal: (..., J, T, T) with M[j, m, n]
    """
    axis = head.axis if axis is None else axis
    theta_c, phi_c = compact_project(x, head, axis)
    width = theta_c.shape[-1]
    layers = list(head.mlp.layers)
    first = layers[0]
    if first.weight.shape[0] != 2 * width:
        raise ShapeError(f"adjustment MLP expects pair width {first.weight.shape[0]}, got 2 x {width}")

    h = (torch.matmul(theta_c, first.weight[:width]).unsqueeze(-2)
         + torch.matmul(phi_c, first.weight[width:]).unsqueeze(-3))
    if first.bias is not None:
        h = h + first.bias
    for i, layer in enumerate(layers[1:]):
        h = prelu(h, head.mlp.slopes[i])
        h = linear_apply(h, layer)

    # h[..., p, q, k] -> M[..., k, p, q]
    return h.movedim(-1, -3)


def update_correlation(correlation: Union[ConstrainedCorrelation, torch.Tensor], m: torch.Tensor,
                       alpha: Union[torch.Tensor, float], reversed_order: bool = False) -> torch.Tensor:
    """
    Effective unshared adjacency A = expand(C) + alpha * M.

    With reversed_order the roles swap: A = M + alpha * expand(C).
    """
    c = correlation_tensor(correlation)
    if m.dim() < 3 or c.shape != m.shape[-2:]:
        raise ShapeError(f"correlation {tuple(c.shape)} cannot be updated by adjustment {tuple(m.shape)}")
    expanded = c.unsqueeze(-3)
    if reversed_order:
        return m + alpha * expanded
    return expanded + alpha * m

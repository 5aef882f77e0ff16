"""
Static GC Layers
nn.Module wrappers holding trainable adjacencies and feature transforms for the static GC
family, plus the generic unit that stacks GC stages and applies PReLU.
"""

import logging
from typing import List, Sequence

import torch
import torch.nn as nn

from src.graphs.adjacency import IndexConvention, expand_spatial, expand_temporal
from src.numerics.layers import PReLU

from .convolutions import Transform, s_gc, st_gc, sts_gc, t_gc

logger = logging.getLogger(__name__)


def _adjacency_parameter(init: torch.Tensor, trainable: bool = True) -> nn.Parameter:
    return nn.Parameter(init.detach().clone(), requires_grad=trainable)


class SpatialGC(nn.Module):
    """S-GC layer. A (J, J) initial adjacency is shared by all frames; a (T, J, J) one is unshared."""

    def __init__(self, adjacency: torch.Tensor, transform: Transform, frames: int):
        super().__init__()
        self.shared = adjacency.dim() == 2
        self.frames = frames
        self.adjacency = _adjacency_parameter(adjacency)
        self.transform = transform

    def effective_adjacency(self) -> torch.Tensor:
        """Per-frame adjacency (T, J, J)."""
        if self.shared:
            return expand_spatial(self.adjacency, self.frames)
        return self.adjacency

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return s_gc(x, self.effective_adjacency(), self.transform)


class TemporalGC(nn.Module):
    """T-GC layer. A (T, T) initial adjacency is shared by all joints; a (J, T, T) one is unshared."""

    def __init__(self, adjacency: torch.Tensor, transform: Transform, joints: int):
        super().__init__()
        self.shared = adjacency.dim() == 2
        self.joints = joints
        self.adjacency = _adjacency_parameter(adjacency)
        self.transform = transform

    def effective_adjacency(self) -> torch.Tensor:
        """Per-joint adjacency (J, T, T)."""
        if self.shared:
            return expand_temporal(self.adjacency, self.joints)
        return self.adjacency

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return t_gc(x, self.effective_adjacency(), self.transform)


class SpatiotemporalGC(nn.Module):
    """ST-GC layer over a full (J*T, J*T) adjacency."""

    def __init__(self, adjacency: torch.Tensor, transform: Transform):
        super().__init__()
        self.adjacency = _adjacency_parameter(adjacency)
        self.transform = transform

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return st_gc(x, self.adjacency, self.transform)


class FactorizedGC(nn.Module):
    """STS-GC layer: unshared spatial and temporal adjacencies with a single feature transform."""

    def __init__(self, spatial: torch.Tensor, temporal: torch.Tensor, transform: Transform,
                 convention: IndexConvention = IndexConvention.SOURCE_FRAME):
        super().__init__()
        self.spatial = _adjacency_parameter(spatial)
        self.temporal = _adjacency_parameter(temporal)
        self.transform = transform
        self.convention = convention

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return sts_gc(x, self.spatial, self.temporal, self.transform, self.convention)


class GCUnit(nn.Module):
    """
    One graph-convolution unit: stages applied in order, the layers of a stage run in
    parallel on the same input and their outputs are summed, then a PReLU activation.
    """

    def __init__(self, stages: Sequence[Sequence[nn.Module]], activation: bool = True):
        super().__init__()
        self.stages = nn.ModuleList(nn.ModuleList(stage) for stage in stages)
        self.activation = PReLU(dtype=self._dtype()) if activation else None

    def _dtype(self) -> torch.dtype:
        for param in self.stages.parameters():
            return param.dtype
        return torch.float64

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for stage in self.stages:
            outputs = [layer(x) for layer in stage]
            x = outputs[0]
            for out in outputs[1:]:
                x = x + out
        if self.activation is not None:
            x = self.activation(x)
        return x

    def layers(self) -> List[nn.Module]:
        return [layer for stage in self.stages for layer in stage]

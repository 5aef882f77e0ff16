"""
Prior-Knowledge Graphs
0/1 adjacency initializations from body connections, limb semantics and temporal context,
plus the seeded random initialization used by baseline GCs.
"""

import logging
import math
from typing import Optional

import torch

from src.numerics.tensor_ops import DEFAULT_DTYPE, ShapeError

from .adjacency import VanillaSpatialAdjacency, VanillaTemporalAdjacency
from .skeleton import SkeletonSpec, SkeletonSpecError

logger = logging.getLogger(__name__)


def build_prior_spatial_natural(spec: SkeletonSpec, dtype: torch.dtype = DEFAULT_DTYPE) -> VanillaSpatialAdjacency:
    """Body-connection graph: bones in both directions plus self-loops."""
    a = torch.eye(spec.joint_count, dtype=dtype)
    for p, q in spec.bone_edges:
        if not (0 <= p < spec.joint_count and 0 <= q < spec.joint_count):
            raise SkeletonSpecError(f"bone ({p},{q}) out of range for {spec.joint_count} joints")
        a[p, q] = 1.0
        a[q, p] = 1.0
    return VanillaSpatialAdjacency(a)


def build_prior_spatial_semantic(spec: SkeletonSpec, dtype: torch.dtype = DEFAULT_DTYPE) -> VanillaSpatialAdjacency:
    """
    Semantic graph: joints in the same limb are fully connected, and every joint of a limb
    is connected to every joint of its mirrored limb. Self-loops included.
    """
    a = torch.eye(spec.joint_count, dtype=dtype)
    for _, joints in spec.limb_groups:
        index = torch.tensor(joints, dtype=torch.long)
        a[index.unsqueeze(1), index.unsqueeze(0)] = 1.0

    group_names = {name for name, _ in spec.limb_groups}
    for first, second in spec.mirror_pairs:
        for name in (first, second):
            if name not in group_names:
                raise SkeletonSpecError(f"mirror references unknown limb group '{name}'")
        left = torch.tensor(spec.limb(first), dtype=torch.long)
        right = torch.tensor(spec.limb(second), dtype=torch.long)
        a[left.unsqueeze(1), right.unsqueeze(0)] = 1.0
        a[right.unsqueeze(1), left.unsqueeze(0)] = 1.0
    return VanillaSpatialAdjacency(a)


def build_prior_temporal_context(frames: int, dtype: torch.dtype = DEFAULT_DTYPE) -> VanillaTemporalAdjacency:
    """Temporal-context graph: every frame connected to itself and its neighbours (|m - n| <= 1)."""
    if frames < 1:
        raise ShapeError(f"temporal context graph needs at least one frame, got {frames}")
    idx = torch.arange(frames)
    a = ((idx.unsqueeze(1) - idx.unsqueeze(0)).abs() <= 1).to(dtype)
    return VanillaTemporalAdjacency(a)


def random_adjacency(size: int, generator: Optional[torch.Generator] = None, leading: tuple = (),
                     dtype: torch.dtype = DEFAULT_DTYPE) -> torch.Tensor:
    """
    Seeded uniform initialization in [-1/sqrt(n), 1/sqrt(n)], n = matrix side.

    Args:
        size: Matrix side n
        generator: Torch generator carrying the seed
        leading: Extra leading extents (unshared axis)
    """
    if size < 1:
        raise ShapeError(f"adjacency side must be positive, got {size}")
    bound = 1.0 / math.sqrt(size)
    values = torch.rand(*leading, size, size, generator=generator, dtype=dtype)
    return (2.0 * values - 1.0) * bound


def prior_mask(adjacency: torch.Tensor) -> torch.Tensor:
    """Boolean mask of the nonzero entries of a prior graph."""
    return adjacency != 0

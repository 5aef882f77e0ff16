"""
Sample-Generic Graph Convolutions
Functional forward passes of the static GC family over features shaped (..., J, T, C).

Spatial adjacencies are (..., T, J, J) with a[t, p, q] the weight from joint p to joint q
at frame t; temporal adjacencies are (..., J, T, T) with a[q, m, n] the weight from frame m
to frame n for joint q.
"""

import logging
from enum import Enum
from typing import Union

import torch

from src.graphs.adjacency import (AdjacencyLike, IndexConvention, VanillaSpatialAdjacency,
                                  VanillaTemporalAdjacency, adjacency_tensor, expand_spatial,
                                  expand_temporal)
from src.numerics.layers import MLP, LinearMap, apply_transform
from src.numerics.tensor_ops import ShapeError, batch_matmul

logger = logging.getLogger(__name__)

Transform = Union[LinearMap, MLP]


class GCKind(Enum):
    ST = "st"
    S = "s"
    T = "t"
    STD = "std"
    TSD = "tsd"
    VSTD = "vstd"
    STS = "sts"
    DS = "ds"
    DT = "dt"
    DSTD = "dstd"
    DTSD = "dtsd"


class Order(Enum):
    SPATIAL_FIRST = "spatial_first"
    TEMPORAL_FIRST = "temporal_first"


def _check_feature(x: torch.Tensor, name: str = "feature") -> None:
    if x.dim() < 3:
        raise ShapeError(f"{name} must be shaped (..., J, T, C), got {tuple(x.shape)}")


def frame_aggregate(f: torch.Tensor, a_s: torch.Tensor) -> torch.Tensor:
    """
    Frame-wise spatial aggregation y[q, t] = sum_p a_s[t, p, q] f[p, t].

    Args:
        f: Feature (..., J, T, C)
        a_s: Spatial adjacency (..., T, J, J), leading extents broadcast against f

    Returns:
        Feature (..., J, T, C)
    """
    _check_feature(f)
    joints, frames, channels = f.shape[-3:]
    if a_s.dim() < 3 or a_s.shape[-3:] != (frames, joints, joints):
        raise ShapeError(
            f"spatial adjacency {tuple(a_s.shape)} does not match feature {tuple(f.shape)}: "
            f"expected trailing extents ({frames}, {joints}, {joints})"
        )
    lead = torch.broadcast_shapes(f.shape[:-3], a_s.shape[:-3])
    per_frame = f.movedim(-2, -3).expand(*lead, frames, joints, channels).reshape(-1, joints, channels)
    weights = a_s.expand(*lead, frames, joints, joints).reshape(-1, joints, joints)
    out = batch_matmul(weights.transpose(1, 2), per_frame)
    return out.reshape(*lead, frames, joints, channels).movedim(-3, -2)


def joint_aggregate(f: torch.Tensor, a_t: torch.Tensor) -> torch.Tensor:
    """
    Joint-wise temporal aggregation y[q, n] = sum_m a_t[q, m, n] f[q, m].

    Args:
        f: Feature (..., J, T, C)
        a_t: Temporal adjacency (..., J, T, T), leading extents broadcast against f

    Returns:
        Feature (..., J, T, C)
    """
    _check_feature(f)
    joints, frames, channels = f.shape[-3:]
    if a_t.dim() < 3 or a_t.shape[-3:] != (joints, frames, frames):
        raise ShapeError(
            f"temporal adjacency {tuple(a_t.shape)} does not match feature {tuple(f.shape)}: "
            f"expected trailing extents ({joints}, {frames}, {frames})"
        )
    lead = torch.broadcast_shapes(f.shape[:-3], a_t.shape[:-3])
    per_joint = f.expand(*lead, joints, frames, channels).reshape(-1, frames, channels)
    weights = a_t.expand(*lead, joints, frames, frames).reshape(-1, frames, frames)
    out = batch_matmul(weights.transpose(1, 2), per_joint)
    return out.reshape(*lead, joints, frames, channels)


def st_gc(x: torch.Tensor, a: AdjacencyLike, transform: Transform) -> torch.Tensor:
    """
    Spatiotemporal GC: y[q, n] = sum_{p, m} a[p*T + m, q*T + n] x[p, m], then the feature transform.

    Args:
        x: Feature (..., J, T, C)
        a: Spatiotemporal adjacency (J*T, J*T)
        transform: LinearMap or MLP applied after aggregation

    Returns:
        Feature (..., J, T, C')
    """
    _check_feature(x)
    a = adjacency_tensor(a)
    joints, frames, channels = x.shape[-3:]
    vertices = joints * frames
    if a.shape[-2:] != (vertices, vertices):
        raise ShapeError(f"spatiotemporal adjacency {tuple(a.shape)} does not match J*T = {vertices}")
    flat = x.reshape(*x.shape[:-3], vertices, channels)
    aggregated = torch.matmul(a.transpose(-1, -2), flat)
    return apply_transform(aggregated.reshape(*x.shape[:-3], joints, frames, channels), transform)


def s_gc(x: torch.Tensor, a_s: AdjacencyLike, transform: Transform) -> torch.Tensor:
    """Spatial GC with one spatial matrix per frame: transform, then frame-wise aggregation."""
    _check_feature(x)
    return frame_aggregate(apply_transform(x, transform), adjacency_tensor(a_s))


def t_gc(x: torch.Tensor, a_t: AdjacencyLike, transform: Transform) -> torch.Tensor:
    """Temporal GC with one temporal matrix per joint: transform, then joint-wise aggregation."""
    _check_feature(x)
    return joint_aggregate(apply_transform(x, transform), adjacency_tensor(a_t))


def decomposed_gc(x: torch.Tensor, a_s: AdjacencyLike, a_t: AdjacencyLike, map1: Transform, map2: Transform,
                  order: Order = Order.SPATIAL_FIRST) -> torch.Tensor:
    """
    Stacked S-GC and T-GC.

    SPATIAL_FIRST gives STD-GC, t_gc(s_gc(x, a_s, map1), a_t, map2);
    TEMPORAL_FIRST gives TSD-GC, s_gc(t_gc(x, a_t, map1), a_s, map2).
    """
    if order == Order.SPATIAL_FIRST:
        return t_gc(s_gc(x, a_s, map1), a_t, map2)
    return s_gc(t_gc(x, a_t, map1), a_s, map2)


def sts_gc(x: torch.Tensor, a_s: AdjacencyLike, a_t: AdjacencyLike, transform: Transform,
           convention: IndexConvention = IndexConvention.SOURCE_FRAME) -> torch.Tensor:
    """
    Factorized spatiotemporal GC: y[q, n] = sum_{p, m} a_s[sigma, p, q] a_t[tau, m, n] x[p, m], then transform.

    (sigma, tau) is (m, q) for SOURCE_FRAME, (n, q) for OUTPUT_FRAME and (n, p) for OUTPUT_JOINT_TEMPORAL.
    """
    _check_feature(x)
    s = adjacency_tensor(a_s)
    t = adjacency_tensor(a_t)
    if convention == IndexConvention.SOURCE_FRAME:
        aggregated = joint_aggregate(frame_aggregate(x, s), t)
    elif convention == IndexConvention.OUTPUT_JOINT_TEMPORAL:
        aggregated = frame_aggregate(joint_aggregate(x, t), s)
    else:
        joints, frames = x.shape[-3], x.shape[-2]
        if s.shape[-3:] != (frames, joints, joints) or t.shape[-3:] != (joints, frames, frames):
            raise ShapeError(
                f"adjacencies {tuple(s.shape)} and {tuple(t.shape)} do not match feature {tuple(x.shape)}"
            )
        aggregated = torch.einsum('npq,qmn,...pmc->...qnc', s, t, x)
    return apply_transform(aggregated, transform)


def vstd_gc(x: torch.Tensor, vanilla_s: Union[VanillaSpatialAdjacency, torch.Tensor],
            vanilla_t: Union[VanillaTemporalAdjacency, torch.Tensor], map1: Transform, map2: Transform,
            order: Order = Order.SPATIAL_FIRST) -> torch.Tensor:
    """Decomposed GC with one spatial matrix shared by all frames and one temporal matrix shared by all joints."""
    _check_feature(x)
    joints, frames = x.shape[-3], x.shape[-2]
    a_s = expand_spatial(adjacency_tensor(vanilla_s), frames)
    a_t = expand_temporal(adjacency_tensor(vanilla_t), joints)
    return decomposed_gc(x, a_s, a_t, map1, map2, order)

"""
Equivalence Oracles
Factorization of stacked (dynamic) decomposed GCs into a single ST-GC, STD vs STS under each
index convention, and the reduction of dynamic layers to static ones at alpha = 0.
"""

import logging
from typing import Dict, Tuple

import torch

from src.dynamic_gc.adjustment import AdjustmentHead, Axis
from src.dynamic_gc.convolutions import ds_gc, dstd_gc, dt_gc
from src.graphs.adjacency import IndexConvention, compose_tensor, expand_spatial, expand_temporal
from src.numerics.layers import LinearMap, compose_maps
from src.numerics.tensor_ops import DEFAULT_DTYPE
from src.static_gc.convolutions import Order, decomposed_gc, s_gc, st_gc, sts_gc, t_gc

logger = logging.getLogger(__name__)

Sizes = Tuple[int, int, int]  # (J, T, C)

# Composition convention matching each stacking order
STACKING_CONVENTION = {
    Order.SPATIAL_FIRST: IndexConvention.SOURCE_FRAME,
    Order.TEMPORAL_FIRST: IndexConvention.OUTPUT_JOINT_TEMPORAL,
}


def _randn(generator: torch.Generator, *shape) -> torch.Tensor:
    return torch.randn(tuple(shape), generator=generator, dtype=DEFAULT_DTYPE)


def _random_map(generator: torch.Generator, channels: int, bias: bool = False) -> LinearMap:
    linear = LinearMap(channels, channels, bias=bias)
    with torch.no_grad():
        linear.weight.copy_(_randn(generator, channels, channels) / channels ** 0.5)
        if bias:
            linear.bias.copy_(_randn(generator, channels))
    return linear


def _random_head(generator: torch.Generator, channels: int, joints: int, frames: int, axis: Axis,
                 reduction: int, alpha: float) -> AdjustmentHead:
    head = AdjustmentHead(channels, joints, frames, axis, reduction)
    with torch.no_grad():
        for param in head.parameters():
            param.copy_(_randn(generator, *param.shape) * 0.5)
        head.alpha.fill_(alpha)
    return head


def _scale_(modules, scale: float) -> None:
    with torch.no_grad():
        for module in modules:
            for param in module.parameters():
                param.mul_(scale)


def verify_factorization(seed: int, sizes: Sizes = (3, 4, 2), reduction: int = 1, identity: bool = False,
                         scale: float = 1.0, order: Order = Order.SPATIAL_FIRST, relative: bool = False) -> float:
    """
    Stacked dynamic GC with adjustments frozen from one input vs a single ST-GC.

    The ST-GC uses the composition of the effective (A^s, A^t) under the stacking order's
    convention and the composed bias-free map W1 W2.

    Args:
        seed: Seed of every random draw
        sizes: (J, T, C)
        reduction: Reduction rate of both heads
        identity: Identity correlations and maps with alpha = 0
        scale: Multiplier applied to every parameter
        order: SPATIAL_FIRST (DSTD) or TEMPORAL_FIRST (DTSD)
        relative: Divide the deviation by max(1, max |y|)

    Returns:
        Max absolute (or relative) deviation
    """
    joints, frames, channels = sizes
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed)

    x = _randn(generator, joints, frames, channels)
    if identity:
        c_s = torch.eye(joints, dtype=DEFAULT_DTYPE)
        c_t = torch.eye(frames, dtype=DEFAULT_DTYPE)
        map1 = LinearMap(channels, channels, bias=False).identity_()
        map2 = LinearMap(channels, channels, bias=False).identity_()
        alpha = 0.0
    else:
        c_s = _randn(generator, joints, joints)
        c_t = _randn(generator, frames, frames)
        map1 = _random_map(generator, channels)
        map2 = _random_map(generator, channels)
        alpha = 0.5 + float(torch.rand(1, generator=generator, dtype=DEFAULT_DTYPE))
    head_s = _random_head(generator, channels, joints, frames, Axis.SPATIAL, reduction, alpha)
    head_t = _random_head(generator, channels, joints, frames, Axis.TEMPORAL, reduction, alpha)
    if scale != 1.0:
        _scale_([map1, map2, head_s, head_t], scale)
        c_s, c_t = c_s * scale, c_t * scale

    with torch.no_grad():
        y, a_s, a_t = dstd_gc(x, c_s, head_s, map1, c_t, head_t, map2, order, return_adjacency=True)
        full = compose_tensor(a_s, a_t, STACKING_CONVENTION[order])
        reference = st_gc(x, full, compose_maps(map1, map2))
    deviation = float((y - reference).abs().max())
    if relative:
        deviation /= max(1.0, float(reference.abs().max()))
    logger.debug(f"factorization seed={seed} sizes={sizes}: deviation {deviation:.3e}")
    return deviation


def verify_std_sts_equivalence(seed: int, sizes: Sizes = (3, 4, 2), vanilla: bool = False,
                               order: Order = Order.SPATIAL_FIRST) -> Dict[IndexConvention, float]:
    """
    Deviation between decomposed_gc(order, W1, W2) and sts_gc(W1 W2) under every convention.

    Args:
        seed: Seed of every random draw
        sizes: (J, T, C)
        vanilla: Use expanded shared adjacencies instead of generic unshared ones
        order: Stacking order of the decomposed side

    Returns:
        Max absolute deviation per convention
    """
    joints, frames, channels = sizes
    generator = torch.Generator().manual_seed(seed)
    x = _randn(generator, joints, frames, channels)
    if vanilla:
        a_s = expand_spatial(_randn(generator, joints, joints), frames)
        a_t = expand_temporal(_randn(generator, frames, frames), joints)
    else:
        a_s = _randn(generator, frames, joints, joints)
        a_t = _randn(generator, joints, frames, frames)
    map1 = _random_map(generator, channels)
    map2 = _random_map(generator, channels)
    composed = compose_maps(map1, map2)

    deviations = {}
    with torch.no_grad():
        stacked = decomposed_gc(x, a_s, a_t, map1, map2, order)
        for convention in IndexConvention:
            deviations[convention] = float((stacked - sts_gc(x, a_s, a_t, composed, convention)).abs().max())
    return deviations


def verify_dynamic_reduction(seed: int, sizes: Sizes = (3, 4, 2), reduction: int = 1) -> float:
    """
    With alpha = 0, DS-GC, DT-GC and DSTD-GC against S-GC, T-GC and STD-GC on expanded correlations.

    Returns:
        Max absolute deviation over the three comparisons
    """
    joints, frames, channels = sizes
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed)
    x = _randn(generator, joints, frames, channels)
    c_s = _randn(generator, joints, joints)
    c_t = _randn(generator, frames, frames)
    map1 = _random_map(generator, channels, bias=True)
    map2 = _random_map(generator, channels, bias=True)
    head_s = _random_head(generator, channels, joints, frames, Axis.SPATIAL, reduction, 0.0)
    head_t = _random_head(generator, channels, joints, frames, Axis.TEMPORAL, reduction, 0.0)

    a_s = expand_spatial(c_s, frames)
    a_t = expand_temporal(c_t, joints)
    with torch.no_grad():
        gaps = [
            (ds_gc(x, c_s, head_s, map1) - s_gc(x, a_s, map1)).abs().max(),
            (dt_gc(x, c_t, head_t, map2) - t_gc(x, a_t, map2)).abs().max(),
            (dstd_gc(x, c_s, head_s, map1, c_t, head_t, map2)
             - decomposed_gc(x, a_s, a_t, map1, map2, Order.SPATIAL_FIRST)).abs().max(),
        ]
    return float(max(gaps))

"""
Prediction Network
Encode unit, residual blocks of GC units and zero-initialized decode unit around a
duplicated-last-pose input sequence, plus the GC unit factory shared with the comparison stacks.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import torch
import torch.nn as nn

from src.data.motion import MotionSequence, duplicate_last_frame
from src.dynamic_gc.layers import DynamicSpatialGC, DynamicTemporalGC
from src.graphs.adjacency import IndexConvention, compose_tensor, expand_spatial, expand_temporal
from src.graphs.priors import (build_prior_spatial_natural, build_prior_spatial_semantic,
                               build_prior_temporal_context, random_adjacency)
from src.graphs.skeleton import SkeletonSpec, default_skeleton, read_skeleton
from src.numerics.layers import MLP, LinearMap
from src.numerics.tensor_ops import DEFAULT_DTYPE, ShapeError
from src.static_gc.convolutions import GCKind
from src.static_gc.layers import FactorizedGC, GCUnit, SpatialGC, SpatiotemporalGC, TemporalGC

from .config import ConfigError, ModelConfig, Variant

logger = logging.getLogger(__name__)


@dataclass
class UnitSpec:
    """Everything a GC unit factory needs besides the kind."""
    joints: int
    frames: int
    channels: int
    reduction: int = 32
    spatial_branches: int = 1
    adjacency_init: str = 'random'
    variant: Variant = Variant.FULL
    index_convention: IndexConvention = IndexConvention.SOURCE_FRAME
    skeleton: Optional[SkeletonSpec] = None


class _AdjacencyFactory:
    """Initial adjacencies for one unit: prior graphs or seeded random values."""

    def __init__(self, spec: UnitSpec, generator: torch.Generator):
        self.spec = spec
        self.generator = generator
        self.use_prior = spec.adjacency_init == 'prior' and spec.variant != Variant.D_NO_PRIOR
        skeleton = spec.skeleton
        if self.use_prior and skeleton is None:
            skeleton = default_skeleton(spec.joints)
        if self.use_prior and skeleton.joint_count != spec.joints:
            raise ConfigError(f"skeleton has {skeleton.joint_count} joints, model expects {spec.joints}")
        self.skeleton = skeleton

    def spatial(self, branch: int = 0) -> torch.Tensor:
        """J x J: natural prior for branch 0, semantic prior for the others."""
        if not self.use_prior:
            return random_adjacency(self.spec.joints, self.generator)
        if branch == 0:
            return build_prior_spatial_natural(self.skeleton).a
        return build_prior_spatial_semantic(self.skeleton).a

    def temporal(self) -> torch.Tensor:
        if not self.use_prior:
            return random_adjacency(self.spec.frames, self.generator)
        return build_prior_temporal_context(self.spec.frames).a

    def unshared_spatial(self, branch: int = 0) -> torch.Tensor:
        if not self.use_prior:
            return random_adjacency(self.spec.joints, self.generator, leading=(self.spec.frames,))
        return expand_spatial(self.spatial(branch), self.spec.frames).clone()

    def unshared_temporal(self) -> torch.Tensor:
        if not self.use_prior:
            return random_adjacency(self.spec.frames, self.generator, leading=(self.spec.joints,))
        return expand_temporal(self.temporal(), self.spec.joints).clone()

    def spatiotemporal(self) -> torch.Tensor:
        vertices = self.spec.joints * self.spec.frames
        if not self.use_prior:
            return random_adjacency(vertices, self.generator)
        return compose_tensor(self.unshared_spatial(), self.unshared_temporal(), IndexConvention.SOURCE_FRAME)


def _dynamic_layer(axis: str, factory: _AdjacencyFactory, spec: UnitSpec, branch: int = 0) -> nn.Module:
    variant = spec.variant
    correlation = factory.spatial(branch) if axis == 'spatial' else factory.temporal()
    trainable_correlation = True
    alpha_init, trainable_alpha = 0.0, True
    if variant == Variant.A_CONSTRAINED_ONLY:
        trainable_alpha = False
    elif variant == Variant.B_DYNAMIC_ONLY:
        correlation = torch.zeros_like(correlation)
        trainable_correlation = False
        alpha_init = 1.0
    layer_cls = DynamicSpatialGC if axis == 'spatial' else DynamicTemporalGC
    return layer_cls(correlation, spec.joints, spec.frames, spec.channels, spec.channels,
                     reduction=spec.reduction, trainable_correlation=trainable_correlation,
                     alpha_init=alpha_init, trainable_alpha=trainable_alpha,
                     reversed_order=variant == Variant.C_REVERSED_UPDATE)


def _dynamic_stages(kind: GCKind, factory: _AdjacencyFactory, spec: UnitSpec) -> List[List[nn.Module]]:
    branches = spec.spatial_branches
    if spec.variant == Variant.E_STATIC_GC:
        spatial = [SpatialGC(factory.unshared_spatial(b), LinearMap(spec.channels, spec.channels), spec.frames)
                   for b in range(branches)]
        temporal = [TemporalGC(factory.unshared_temporal(), LinearMap(spec.channels, spec.channels), spec.joints)]
    elif spec.variant == Variant.F_DS_ONLY:
        spatial = [_dynamic_layer('spatial', factory, spec, b) for b in range(branches)]
        temporal = [_dynamic_layer('spatial', factory, spec, 0)]
    elif spec.variant == Variant.G_DT_ONLY:
        spatial = [_dynamic_layer('temporal', factory, spec) for _ in range(branches)]
        temporal = [_dynamic_layer('temporal', factory, spec)]
    else:
        spatial = [_dynamic_layer('spatial', factory, spec, b) for b in range(branches)]
        temporal = [_dynamic_layer('temporal', factory, spec)]
    return [spatial, temporal] if kind == GCKind.DSTD else [temporal, spatial]


def build_unit(kind: GCKind, spec: UnitSpec, generator: torch.Generator) -> GCUnit:
    """
    Build one C -> C GC unit of the given kind.

    Decomposed kinds place their spatial stage first (STD, VSTD, DSTD) or second (TSD, DTSD);
    parallel spatial branches are summed. ST and STS carry a two-layer MLP transform.
    """
    factory = _AdjacencyFactory(spec, generator)
    c = spec.channels

    def linear():
        return LinearMap(c, c)

    def mlp():
        return MLP([c, c, c])

    if kind == GCKind.ST:
        stages = [[SpatiotemporalGC(factory.spatiotemporal(), mlp())]]
    elif kind == GCKind.STS:
        stages = [[FactorizedGC(factory.unshared_spatial(), factory.unshared_temporal(), mlp(),
                                spec.index_convention)]]
    elif kind == GCKind.S:
        stages = [[SpatialGC(factory.unshared_spatial(), linear(), spec.frames)]]
    elif kind == GCKind.T:
        stages = [[TemporalGC(factory.unshared_temporal(), linear(), spec.joints)]]
    elif kind in (GCKind.STD, GCKind.TSD, GCKind.VSTD):
        vanilla = kind == GCKind.VSTD
        spatial = [SpatialGC(factory.spatial(b) if vanilla else factory.unshared_spatial(b), linear(), spec.frames)
                   for b in range(spec.spatial_branches)]
        temporal = [TemporalGC(factory.temporal() if vanilla else factory.unshared_temporal(), linear(), spec.joints)]
        stages = [temporal, spatial] if kind == GCKind.TSD else [spatial, temporal]
    elif kind == GCKind.DS:
        stages = [[_dynamic_layer('spatial', factory, spec, b) for b in range(spec.spatial_branches)]]
    elif kind == GCKind.DT:
        stages = [[_dynamic_layer('temporal', factory, spec)]]
    elif kind in (GCKind.DSTD, GCKind.DTSD):
        stages = _dynamic_stages(kind, factory, spec)
    else:
        raise ConfigError(f"unsupported GC kind {kind}")
    return GCUnit(stages)


def build_comparison_stack(kind: GCKind, joints: int, frames: int, channels: int = 64, units: int = 7,
                           reduction: int = 32, seed: int = 0,
                           dtype: torch.dtype = DEFAULT_DTYPE) -> nn.Sequential:
    """Stack of identical C -> C units with randomly initialized adjacencies and one spatial branch."""
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed)
    spec = UnitSpec(joints, frames, channels, reduction=reduction)
    stack = nn.Sequential(*[build_unit(kind, spec, generator) for _ in range(units)])
    return stack.to(dtype)


def aggregation_gain(adjacency: torch.Tensor) -> float:
    """Largest absolute column sum: the max-norm gain of y[p] = sum_q a[q, p] x[q]."""
    return float(adjacency.detach().abs().sum(dim=-2).max())


def _layer_gain(layer: nn.Module) -> float:
    if isinstance(layer, (DynamicSpatialGC, DynamicTemporalGC)):
        return aggregation_gain(layer.correlation.value)
    if isinstance(layer, (SpatialGC, TemporalGC)):
        return aggregation_gain(layer.effective_adjacency())
    if isinstance(layer, SpatiotemporalGC):
        return aggregation_gain(layer.adjacency)
    if isinstance(layer, FactorizedGC):
        return aggregation_gain(layer.spatial) * aggregation_gain(layer.temporal)
    raise ConfigError(f"no aggregation gain for {type(layer).__name__}")


def _scale_transform_(transform: nn.Module, scale: float) -> None:
    first = transform.layers[0] if isinstance(transform, MLP) else transform
    first.weight.mul_(scale)
    if first.bias is not None:
        first.bias.mul_(scale)


def balance_unit_(unit: GCUnit) -> GCUnit:
    """
    Rescale the feature transforms of a freshly built unit so each stage is roughly
    norm-preserving: every layer is divided by its stage width and by the gain of its initial
    adjacency (when above 1). Adjustment heads are shrunk by the number of aggregated vertices.
    Adjacencies themselves are left as initialized.
    """
    with torch.no_grad():
        for stage in unit.stages:
            for layer in stage:
                _scale_transform_(layer.transform, 1.0 / (len(stage) * max(1.0, _layer_gain(layer))))
                if isinstance(layer, (DynamicSpatialGC, DynamicTemporalGC)):
                    _scale_transform_(layer.head.mlp.layers[-1], 1.0 / layer.correlation.value.shape[-1])
    return unit


class Block(nn.Module):
    """Basic block: n_c GC units wrapped by an identity skip."""

    def __init__(self, units: List[GCUnit]):
        super().__init__()
        self.units = nn.ModuleList(units)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = x
        for unit in self.units:
            h = unit(h)
        return x + h


class Model(nn.Module):
    """Encode -> residual blocks -> decode, with a global residual over the duplicated input."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg

        skeleton = None
        if cfg.skeleton_path:
            skeleton = read_skeleton(cfg.skeleton_path)
        elif cfg.adjacency_init == 'prior' and cfg.variant != Variant.D_NO_PRIOR:
            skeleton = default_skeleton(cfg.J)
        spec = UnitSpec(cfg.J, cfg.T, cfg.C, reduction=cfg.r, spatial_branches=cfg.spatial_branches,
                        adjacency_init=cfg.adjacency_init, variant=cfg.variant,
                        index_convention=cfg.index_convention, skeleton=skeleton)
        generator = torch.Generator().manual_seed(cfg.seed)

        self.encode = LinearMap(cfg.D, cfg.C)
        self.blocks = nn.ModuleList(
            Block([balance_unit_(build_unit(cfg.gc_kind, spec, generator)) for _ in range(cfg.n_c)])
            for _ in range(cfg.n_b)
        )
        self.decode = LinearMap(cfg.C, cfg.D).zero_()
        self.to(cfg.dtype)

        logger.info(f"Model initialized: kind={cfg.gc_kind.value} variant={cfg.variant.value} "
                    f"J={cfg.J} T={cfg.T} C={cfg.C} blocks={cfg.n_b}x{cfg.n_c}")

    def units(self) -> List[GCUnit]:
        return [unit for block in self.blocks for unit in block.units]

    def forward(self, observed: torch.Tensor) -> torch.Tensor:
        """
        Args:
            observed: (..., J, K, D) observed poses

        Returns:
            (..., J, K + L, D) full-sequence prediction
        """
        if observed.dim() < 3 or observed.shape[-3:] != (self.cfg.J, self.cfg.K, self.cfg.D):
            raise ShapeError(
                f"model expects observed poses (..., {self.cfg.J}, {self.cfg.K}, {self.cfg.D}), "
                f"got {tuple(observed.shape)}"
            )
        x = duplicate_last_frame(observed.to(self.cfg.dtype), self.cfg.L)
        h = self.encode(x / self.cfg.pose_scale)
        for block in self.blocks:
            h = block(h)
        return x + self.cfg.pose_scale * self.decode(h)


def build_model(cfg: ModelConfig) -> Model:
    """Seeded model construction."""
    torch.manual_seed(cfg.seed)
    return Model(cfg)


def forward_model(model: Model, observed: MotionSequence) -> MotionSequence:
    """Predict the K + L frame sequence for one observed K-frame sequence."""
    if observed.frames != model.cfg.K:
        raise ShapeError(f"observed sequence has {observed.frames} frames, model expects K={model.cfg.K}")
    with torch.no_grad():
        values = model(torch.from_numpy(observed.values))
    return MotionSequence(values.to(torch.float64).numpy(), observed.fps)

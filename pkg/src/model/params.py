"""
Parameter Accounting
Exact per-layer parameter counts of built modules, closed-form per-kind formulas and
correlation storage sizes.
"""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import torch.nn as nn

from src.static_gc.convolutions import GCKind

from .config import ModelConfig
from .network import build_model

logger = logging.getLogger(__name__)


@dataclass
class ParamReport:
    per_layer: Dict[str, int]
    total: int
    frozen: int = 0

    def lines(self):
        for name, count in self.per_layer.items():
            yield f"{name}\t{count}"
        yield f"total\t{self.total}"


def count_params(model_or_cfg: Union[nn.Module, ModelConfig]) -> ParamReport:
    """
    Exact counts over trainable tensors, grouped by owning module path.

    A ModelConfig is built first (seeded) and then counted.
    """
    if isinstance(model_or_cfg, ModelConfig):
        module = build_model(model_or_cfg)
    else:
        module = model_or_cfg

    per_layer = OrderedDict()
    frozen = 0
    for name, param in module.named_parameters():
        if not param.requires_grad:
            frozen += param.numel()
            continue
        owner = name.rsplit('.', 1)[0] if '.' in name else name
        per_layer[owner] = per_layer.get(owner, 0) + param.numel()
    total = sum(per_layer.values())
    logger.debug(f"Counted {total} trainable parameters ({frozen} frozen)")
    return ParamReport(per_layer, total, frozen)


def linear_params(c_in: int, c_out: int, bias: bool = True) -> int:
    return c_in * c_out + (c_out if bias else 0)


def mlp_params(dims: Sequence[int]) -> int:
    """Linear layers plus one PReLU slope per hidden activation."""
    return sum(linear_params(dims[i], dims[i + 1]) for i in range(len(dims) - 1)) + max(0, len(dims) - 2)


def head_params(channels: int, reduction: int, output_extent: int) -> int:
    """theta + phi + pairwise MLP + alpha."""
    compact = max(1, math.ceil(channels / reduction))
    pair = 2 * output_extent * compact
    return 2 * linear_params(channels, compact) + mlp_params([pair, output_extent, output_extent]) + 1


def unit_params(kind: GCKind, joints: int, frames: int, channels: int, reduction: int = 32,
                spatial_branches: int = 1) -> int:
    """Closed-form trainable count of one C -> C unit, PReLU included."""
    J, T, C, b = joints, frames, channels, spatial_branches
    linear = linear_params(C, C)
    mlp = mlp_params([C, C, C])
    ds = J * J + head_params(C, reduction, T) + linear
    dt = T * T + head_params(C, reduction, J) + linear
    formulas = {
        GCKind.ST: (J * T) ** 2 + mlp,
        GCKind.STS: T * J * J + J * T * T + mlp,
        GCKind.S: T * J * J + linear,
        GCKind.T: J * T * T + linear,
        GCKind.STD: b * (T * J * J + linear) + J * T * T + linear,
        GCKind.TSD: b * (T * J * J + linear) + J * T * T + linear,
        GCKind.VSTD: b * (J * J + linear) + T * T + linear,
        GCKind.DS: b * ds,
        GCKind.DT: dt,
        GCKind.DSTD: b * ds + dt,
        GCKind.DTSD: b * ds + dt,
    }
    return formulas[kind] + 1


def model_params(cfg: ModelConfig) -> int:
    """Closed-form trainable count of a FULL-variant model."""
    unit = unit_params(cfg.gc_kind, cfg.J, cfg.T, cfg.C, cfg.r, cfg.spatial_branches)
    return linear_params(cfg.D, cfg.C) + linear_params(cfg.C, cfg.D) + cfg.n_b * cfg.n_c * unit


def correlation_storage(kind: GCKind, joints: int, frames: int) -> int:
    """Number of adjacency entries a single-branch unit of this kind stores."""
    J, T = joints, frames
    storage = {
        GCKind.ST: (J * T) ** 2,
        GCKind.S: T * J * J,
        GCKind.T: J * T * T,
        GCKind.STD: T * J * J + J * T * T,
        GCKind.TSD: T * J * J + J * T * T,
        GCKind.STS: T * J * J + J * T * T,
        GCKind.VSTD: J * J + T * T,
        GCKind.DS: J * J,
        GCKind.DT: T * T,
        GCKind.DSTD: J * J + T * T,
        GCKind.DTSD: J * J + T * T,
    }
    return storage[kind]

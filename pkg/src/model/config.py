"""
Model Configuration
Sequence extents, widths, block counts and the GC kind / ablation variant selectors.
"""

import logging
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict, Optional

import torch

from config import settings
from src.graphs.adjacency import IndexConvention
from src.static_gc.convolutions import GCKind

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for inconsistent or unknown configuration values."""


class Variant(Enum):
    FULL = "full"
    A_CONSTRAINED_ONLY = "a_constrained_only"  # alpha frozen at 0
    B_DYNAMIC_ONLY = "b_dynamic_only"          # C frozen at 0, alpha starts at 1
    C_REVERSED_UPDATE = "c_reversed_update"    # A = M + alpha * C
    D_NO_PRIOR = "d_no_prior"                  # random init of every C
    E_STATIC_GC = "e_static_gc"                # S/T-GC with expanded prior adjacencies
    F_DS_ONLY = "f_ds_only"                    # DT-GC replaced by DS-GC
    G_DT_ONLY = "g_dt_only"                    # DS-GC replaced by DT-GC

    @classmethod
    def parse(cls, text: str) -> "Variant":
        """Accept the full value ('a_constrained_only'), the member name or the single letter ('a')."""
        key = text.strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()) or (len(key) == 1 and member.value.startswith(key + "_")):
                return member
        raise ConfigError(f"unknown variant '{text}', expected one of {[m.value for m in cls]}")


ADJACENCY_INITS = ('prior', 'random')
PRECISIONS = {'float64': torch.float64, 'float32': torch.float32}


@dataclass
class ModelConfig:
    """Prediction model configuration. T = K + L is derived."""
    J: int = settings.SYNTH_JOINTS
    K: int = settings.OBSERVED_FRAMES
    L: int = settings.PREDICTED_FRAMES
    D: int = settings.COORDINATE_DIM
    C: int = settings.CHANNELS
    r: int = settings.REDUCTION_RATE
    n_b: int = settings.BLOCK_COUNT
    n_c: int = settings.UNITS_PER_BLOCK
    gc_kind: GCKind = GCKind(settings.DEFAULT_GC_KIND)
    variant: Variant = Variant(settings.DEFAULT_VARIANT)
    index_convention: IndexConvention = IndexConvention(settings.DEFAULT_INDEX_CONVENTION)
    seed: int = settings.SEED
    spatial_branches: int = settings.SPATIAL_BRANCHES
    adjacency_init: str = 'prior'
    skeleton_path: Optional[str] = None
    precision: str = settings.DEFAULT_PRECISION
    pose_scale: float = settings.POSE_SCALE

    @property
    def T(self) -> int:
        return self.K + self.L

    @property
    def dtype(self) -> torch.dtype:
        return PRECISIONS[self.precision]

    def validate(self) -> "ModelConfig":
        for name in ('J', 'K', 'D', 'C', 'r', 'n_b', 'n_c', 'spatial_branches'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"model.{name} must be a positive integer, got {value!r}")
        if not isinstance(self.L, int) or self.L < 0:
            raise ConfigError(f"model.L must be a non-negative integer, got {self.L!r}")
        if self.adjacency_init not in ADJACENCY_INITS:
            raise ConfigError(f"model.adjacency_init must be one of {ADJACENCY_INITS}, got {self.adjacency_init!r}")
        if not isinstance(self.pose_scale, (int, float)) or not self.pose_scale > 0:
            raise ConfigError(f"model.pose_scale must be positive, got {self.pose_scale!r}")
        if self.precision not in PRECISIONS:
            raise ConfigError(f"model.precision must be one of {sorted(PRECISIONS)}, got {self.precision!r}")
        if self.variant != Variant.FULL and self.gc_kind not in (GCKind.DSTD, GCKind.DTSD):
            raise ConfigError(f"variant {self.variant.value} applies to dstd/dtsd models, not {self.gc_kind.value}")
        return self

    def to_dict(self) -> Dict[str, object]:
        """Plain-value mapping (enums as their values), suitable for checkpoints and logs."""
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, Enum):
                out[key] = value.value
        return out

    @classmethod
    def from_dict(cls, values: Dict[str, object]) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown model keys: {sorted(unknown)}")
        data = dict(values)
        try:
            if 'gc_kind' in data:
                data['gc_kind'] = GCKind(data['gc_kind'])
            if 'variant' in data:
                data['variant'] = Variant.parse(data['variant'])
            if 'index_convention' in data:
                data['index_convention'] = IndexConvention(data['index_convention'])
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return cls(**data).validate()

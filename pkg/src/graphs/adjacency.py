"""
Adjacency Representations
Vanilla and unshared spatial/temporal adjacencies, expansion, and composition into a
full spatiotemporal adjacency.

Vertex flattening is joint-major everywhere: vertex (j, t) has index j * T + t.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

import torch

from src.numerics.tensor_ops import NumericError, ShapeError

logger = logging.getLogger(__name__)


class IndexConvention(Enum):
    """Which frame selects the spatial slice (and which joint the temporal slice) when composing."""
    SOURCE_FRAME = "source_frame"                    # a^s[m,p,q] * a^t[q,m,n]  (spatial-first stacking)
    OUTPUT_FRAME = "output_frame"                    # a^s[n,p,q] * a^t[q,m,n]
    OUTPUT_JOINT_TEMPORAL = "output_joint_temporal"  # a^s[n,p,q] * a^t[p,m,n]  (temporal-first stacking)


_COMPOSE_EQUATIONS = {
    IndexConvention.SOURCE_FRAME: 'mpq,qmn->pmqn',
    IndexConvention.OUTPUT_FRAME: 'npq,qmn->pmqn',
    IndexConvention.OUTPUT_JOINT_TEMPORAL: 'npq,pmn->pmqn',
}


def _validate(a: torch.Tensor, ndim: int, name: str) -> None:
    if not isinstance(a, torch.Tensor):
        raise ShapeError(f"{name} adjacency must be a tensor, got {type(a).__name__}")
    if a.dim() != ndim:
        raise ShapeError(f"{name} adjacency needs {ndim} extents, got shape {tuple(a.shape)}")
    if a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"{name} adjacency must be square in its last two extents, got {tuple(a.shape)}")
    if not bool(torch.isfinite(a).all()):
        raise NumericError(f"{name} adjacency has non-finite entries")


@dataclass(frozen=True, eq=False)
class VanillaSpatialAdjacency:
    """J x J matrix; a[p, q] is the influence of joint p on joint q."""
    a: torch.Tensor

    def __post_init__(self):
        _validate(self.a, 2, "vanilla spatial")

    @property
    def joints(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class VanillaTemporalAdjacency:
    """T x T matrix shared by every joint."""
    a: torch.Tensor

    def __post_init__(self):
        _validate(self.a, 2, "vanilla temporal")

    @property
    def frames(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class UnsharedSpatialAdjacency:
    """T x J x J tensor, one spatial matrix per frame."""
    a: torch.Tensor

    def __post_init__(self):
        _validate(self.a, 3, "unshared spatial")

    @property
    def frames(self) -> int:
        return self.a.shape[0]

    @property
    def joints(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True, eq=False)
class UnsharedTemporalAdjacency:
    """J x T x T tensor, one temporal matrix per joint."""
    a: torch.Tensor

    def __post_init__(self):
        _validate(self.a, 3, "unshared temporal")

    @property
    def joints(self) -> int:
        return self.a.shape[0]

    @property
    def frames(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True, eq=False)
class SpatiotemporalAdjacency:
    """(J*T) x (J*T) matrix over all joint-frame vertices."""
    a: torch.Tensor
    joints: int
    frames: int

    def __post_init__(self):
        _validate(self.a, 2, "spatiotemporal")
        if self.a.shape[0] != self.joints * self.frames:
            raise ShapeError(
                f"spatiotemporal adjacency extent {self.a.shape[0]} != J*T = {self.joints}*{self.frames}"
            )


Adjacency = Union[VanillaSpatialAdjacency, VanillaTemporalAdjacency, UnsharedSpatialAdjacency,
                  UnsharedTemporalAdjacency, SpatiotemporalAdjacency]
AdjacencyLike = Union[Adjacency, torch.Tensor]


def adjacency_tensor(adjacency: AdjacencyLike) -> torch.Tensor:
    """Underlying tensor of an adjacency wrapper (tensors pass through)."""
    if isinstance(adjacency, torch.Tensor):
        return adjacency
    return adjacency.a


def expand_spatial(a: torch.Tensor, frames: int) -> torch.Tensor:
    """Broadcast a (..., J, J) matrix to (..., T, J, J)."""
    if frames < 1:
        raise ShapeError(f"frame count must be positive, got {frames}")
    return a.unsqueeze(-3).expand(*a.shape[:-2], frames, a.shape[-2], a.shape[-1])


def expand_temporal(a: torch.Tensor, joints: int) -> torch.Tensor:
    """Broadcast a (..., T, T) matrix to (..., J, T, T)."""
    if joints < 1:
        raise ShapeError(f"joint count must be positive, got {joints}")
    return a.unsqueeze(-3).expand(*a.shape[:-2], joints, a.shape[-2], a.shape[-1])


def expand_vanilla(vanilla: Union[VanillaSpatialAdjacency, VanillaTemporalAdjacency], count: int):
    """
    Repeat a vanilla adjacency along its unshared axis.

    Args:
        vanilla: Spatial (J x J) or temporal (T x T) vanilla adjacency
        count: Number of frames (spatial) or joints (temporal)

    Returns:
        UnsharedSpatialAdjacency (T, J, J) or UnsharedTemporalAdjacency (J, T, T)
    """
    if isinstance(vanilla, VanillaSpatialAdjacency):
        return UnsharedSpatialAdjacency(expand_spatial(vanilla.a, count).clone())
    if isinstance(vanilla, VanillaTemporalAdjacency):
        return UnsharedTemporalAdjacency(expand_temporal(vanilla.a, count).clone())
    raise ShapeError(f"expand_vanilla expects a vanilla adjacency, got {type(vanilla).__name__}")


def compose_tensor(a_s: torch.Tensor, a_t: torch.Tensor, convention: IndexConvention) -> torch.Tensor:
    """Tensor form of compose_spatiotemporal: (T,J,J) x (J,T,T) -> (J*T, J*T)."""
    if a_s.dim() != 3 or a_t.dim() != 3:
        raise ShapeError(f"composition expects unshared adjacencies, got {tuple(a_s.shape)} and {tuple(a_t.shape)}")
    frames, joints = a_s.shape[0], a_s.shape[1]
    if a_t.shape[0] != joints or a_t.shape[1] != frames:
        raise ShapeError(
            f"spatial adjacency {tuple(a_s.shape)} and temporal adjacency {tuple(a_t.shape)} disagree on J/T"
        )
    full = torch.einsum(_COMPOSE_EQUATIONS[convention], a_s, a_t)
    return full.reshape(joints * frames, joints * frames)


def compose_spatiotemporal(a_s: AdjacencyLike, a_t: AdjacencyLike,
                           convention: IndexConvention = IndexConvention.SOURCE_FRAME) -> SpatiotemporalAdjacency:
    """
    Compose unshared spatial and temporal adjacencies into one spatiotemporal adjacency.

    Entry (p*T + m, q*T + n) is the weight from source vertex (p, m) to target (q, n):
    SOURCE_FRAME uses a_s[m,p,q] a_t[q,m,n], OUTPUT_FRAME a_s[n,p,q] a_t[q,m,n],
    OUTPUT_JOINT_TEMPORAL a_s[n,p,q] a_t[p,m,n].
    """
    s = adjacency_tensor(a_s)
    t = adjacency_tensor(a_t)
    full = compose_tensor(s, t, convention)
    return SpatiotemporalAdjacency(full, joints=s.shape[1], frames=s.shape[0])

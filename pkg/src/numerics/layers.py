"""
Parameterized Differentiable Primitives
LinearMap, MLP and PReLU activation holding torch parameters.
"""

import logging
import math
from typing import Sequence, Union

import torch
import torch.nn as nn

from .tensor_ops import DEFAULT_DTYPE, ShapeError, linear_apply, mlp_apply, prelu

logger = logging.getLogger(__name__)

# PReLU slope at initialization (one slope per activation layer)
PRELU_INIT_SLOPE = 0.25


class LinearMap(nn.Module):
    """Feature transform y = x W (+ b) with W stored as C x C'."""

    def __init__(self, in_features: int, out_features: int, bias: bool = True,
                 dtype: torch.dtype = DEFAULT_DTYPE):
        """
        Initialize with fan-based uniform weights and zero bias.

        Args:
            in_features: Input width C
            out_features: Output width C'
            bias: Whether to carry a bias term
            dtype: Parameter precision
        """
        super().__init__()
        if in_features < 1 or out_features < 1:
            raise ShapeError(f"linear map extents must be positive, got {in_features}x{out_features}")
        self.in_features = in_features
        self.out_features = out_features
        bound = math.sqrt(6.0 / (in_features + out_features))
        self.weight = nn.Parameter(torch.empty(in_features, out_features, dtype=dtype).uniform_(-bound, bound))
        if bias:
            self.bias = nn.Parameter(torch.zeros(out_features, dtype=dtype))
        else:
            self.register_parameter("bias", None)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return linear_apply(x, self)

    def zero_(self) -> "LinearMap":
        """Set weight and bias to zero in place."""
        with torch.no_grad():
            self.weight.zero_()
            if self.bias is not None:
                self.bias.zero_()
        return self

    def identity_(self) -> "LinearMap":
        """Set the map to identity (square maps only)."""
        if self.in_features != self.out_features:
            raise ShapeError(f"identity needs a square map, got {self.in_features}x{self.out_features}")
        with torch.no_grad():
            self.weight.copy_(torch.eye(self.in_features, dtype=self.weight.dtype))
            if self.bias is not None:
                self.bias.zero_()
        return self

    def extra_repr(self) -> str:
        return f"{self.in_features} -> {self.out_features}, bias={self.bias is not None}"


class MLP(nn.Module):
    """Stack of LinearMaps with a learnable PReLU slope after every layer but the last."""

    def __init__(self, dims: Sequence[int], bias: bool = True, dtype: torch.dtype = DEFAULT_DTYPE):
        """
        Args:
            dims: Layer widths [C0, C1, ..., C_last]; consecutive maps chain by construction
            bias: Whether the linear maps carry biases
            dtype: Parameter precision
        """
        super().__init__()
        if len(dims) < 2:
            raise ShapeError(f"MLP needs at least two widths, got {list(dims)}")
        self.dims = list(dims)
        self.layers = nn.ModuleList(
            LinearMap(dims[i], dims[i + 1], bias=bias, dtype=dtype) for i in range(len(dims) - 1)
        )
        self.slopes = nn.ParameterList(
            nn.Parameter(torch.tensor(PRELU_INIT_SLOPE, dtype=dtype)) for _ in range(len(dims) - 2)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return mlp_apply(x, self)

    def zero_(self) -> "MLP":
        for layer in self.layers:
            layer.zero_()
        return self


class PReLU(nn.Module):
    """Single-slope PReLU activation."""

    def __init__(self, init: float = PRELU_INIT_SLOPE, dtype: torch.dtype = DEFAULT_DTYPE):
        super().__init__()
        self.slope = nn.Parameter(torch.tensor(init, dtype=dtype))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return prelu(x, self.slope)


def apply_transform(x: torch.Tensor, transform: Union[LinearMap, MLP]) -> torch.Tensor:
    """Dispatch a feature transform that is either a single map or an MLP."""
    if isinstance(transform, MLP):
        return mlp_apply(x, transform)
    return linear_apply(x, transform)


def compose_maps(first: LinearMap, second: LinearMap) -> LinearMap:
    """
    Build the single map equivalent to applying `first` then `second` (W = W1 W2).

    Biases compose affinely (b = b1 W2 + b2); the result carries a bias only if either input does.
    """
    if first.out_features != second.in_features:
        raise ShapeError(
            f"cannot compose {first.in_features}x{first.out_features} with "
            f"{second.in_features}x{second.out_features}"
        )
    has_bias = first.bias is not None or second.bias is not None
    composed = LinearMap(first.in_features, second.out_features, bias=has_bias, dtype=first.weight.dtype)
    with torch.no_grad():
        composed.weight.copy_(first.weight @ second.weight)
        if has_bias:
            b = torch.zeros(second.out_features, dtype=first.weight.dtype)
            if first.bias is not None:
                b = b + first.bias @ second.weight
            if second.bias is not None:
                b = b + second.bias
            composed.bias.copy_(b)
    return composed


def count_elements(module: nn.Module, trainable_only: bool = True) -> int:
    """Number of scalar parameters held by a module."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad or not trainable_only)

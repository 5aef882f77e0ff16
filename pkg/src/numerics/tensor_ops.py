"""
Dense Tensor Primitives
Exact-shape wrappers around the torch kernels every graph convolution is built from.
"""

import logging
from typing import Union

import torch

logger = logging.getLogger(__name__)

# All verification runs at 64-bit; training may cast the model down to 32-bit
DEFAULT_DTYPE = torch.float64


class ShapeError(ValueError):
    """Raised when tensor extents do not line up."""


class NumericError(ValueError):
    """Raised when a computation produces non-finite values."""


def linear_apply(x: torch.Tensor, linear_map) -> torch.Tensor:
    """
    Apply a linear map to the trailing extent of x.

    Args:
        x: Tensor of shape (..., C)
        linear_map: object exposing `weight` (C x C') and optional `bias` (C')

    Returns:
        Tensor of shape (..., C') equal to x @ W (+ bias)
    """
    weight = linear_map.weight
    if weight.dim() != 2:
        raise ShapeError(f"linear map weight must have two extents, got {tuple(weight.shape)}")
    if x.shape[-1] != weight.shape[0]:
        raise ShapeError(
            f"cannot apply map {tuple(weight.shape)} to input {tuple(x.shape)}: "
            f"trailing extent {x.shape[-1]} != {weight.shape[0]}"
        )
    y = torch.matmul(x, weight)
    bias = getattr(linear_map, "bias", None)
    if bias is not None:
        y = y + bias
    return y


def prelu(x: torch.Tensor, slope: Union[torch.Tensor, float]) -> torch.Tensor:
    """Elementwise x if x >= 0 else slope * x."""
    return torch.where(x >= 0, x, slope * x)


def batch_matmul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """
    Per-batch matrix product.

    Args:
        a: Tensor of shape (B, M, K)
        b: Tensor of shape (B, K, N)

    Returns:
        Tensor of shape (B, M, N)
    """
    if a.dim() != 3 or b.dim() != 3:
        raise ShapeError(f"batch_matmul expects 3-d operands, got {tuple(a.shape)} and {tuple(b.shape)}")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"batch extents differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    if a.shape[2] != b.shape[1]:
        raise ShapeError(f"inner extents differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    return torch.bmm(a, b)


def mlp_apply(x: torch.Tensor, net) -> torch.Tensor:
    """
    Run a multi-layer perceptron: linear maps with PReLU in between, last layer linear.

    Args:
        x: Tensor of shape (..., C0)
        net: object exposing `layers` (linear maps) and `slopes` (one per hidden activation)

    Returns:
        Tensor of shape (..., C_last)
    """
    layers = list(net.layers)
    if x.shape[-1] != layers[0].weight.shape[0]:
        raise ShapeError(
            f"MLP expects trailing extent {layers[0].weight.shape[0]}, got input {tuple(x.shape)}"
        )
    for i, layer in enumerate(layers):
        x = linear_apply(x, layer)
        if i < len(layers) - 1:
            x = prelu(x, net.slopes[i])
    return x

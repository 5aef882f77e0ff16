"""
Finite-Difference Gradient Verifier
Compares torch autograd gradients against central differences, parameter by parameter.
"""

import logging
from typing import Callable, Dict, Iterable, Optional, Tuple

import torch

from .tensor_ops import NumericError

logger = logging.getLogger(__name__)

# Central-difference step, scaled by max(1, |p|) for every coordinate
DEFAULT_STEP = 1e-5


def _scalar(value: torch.Tensor) -> float:
    if value.numel() != 1:
        raise NumericError(f"function must return a scalar, got shape {tuple(value.shape)}")
    result = float(value.detach())
    if result != result or result in (float("inf"), float("-inf")):
        raise NumericError(f"function returned non-finite value {result}")
    return result


def grad_check(f: Callable[[], torch.Tensor], params, h: float = DEFAULT_STEP,
               report: Optional[Dict[str, float]] = None) -> float:
    """
    Verify autograd gradients of a scalar function against central differences.

    Args:
        f: Zero-argument callable evaluating the scalar objective from the current parameter values
        params: Iterable of leaf tensors, or of (name, tensor) pairs
        h: Base finite-difference step
        report: Optional dict filled with the max relative error per parameter name

    Returns:
        Max over all coordinates of |analytic - fd| / max(1, |fd|)
    """
    named = _named(params)
    tensors = [p for _, p in named]

    value = f()
    _scalar(value)
    grads = torch.autograd.grad(value, tensors, allow_unused=True)

    max_error = 0.0
    with torch.no_grad():
        for (name, param), grad in zip(named, grads):
            analytic = torch.zeros_like(param) if grad is None else grad
            flat = param.data.view(-1)
            flat_grad = analytic.reshape(-1)
            param_error = 0.0
            for i in range(flat.numel()):
                original = float(flat[i])
                step = h * max(1.0, abs(original))
                flat[i] = original + step
                plus = _scalar(f())
                flat[i] = original - step
                minus = _scalar(f())
                flat[i] = original
                numeric = (plus - minus) / (2.0 * step)
                error = abs(float(flat_grad[i]) - numeric) / max(1.0, abs(numeric))
                param_error = max(param_error, error)
            if report is not None:
                report[name] = param_error
            max_error = max(max_error, param_error)

    logger.debug(f"grad_check over {len(named)} tensors: max relative error {max_error:.3e}")
    return max_error


def _named(params) -> list:
    named = []
    for i, item in enumerate(params):
        if isinstance(item, tuple):
            name, tensor = item
        else:
            name, tensor = f"param{i}", item
        if not tensor.requires_grad:
            continue
        if not tensor.is_contiguous():
            raise NumericError(f"parameter {name} must be contiguous for in-place perturbation")
        named.append((name, tensor))
    return named


def module_objective(module: torch.nn.Module, inputs: torch.Tensor,
                     seed: int = 0) -> Tuple[Callable[[], torch.Tensor], Iterable]:
    """
    Build a generic scalar objective for a module: a fixed random projection of its output.

    Returns:
        (objective, named trainable parameters)
    """
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        output_shape = module(inputs).shape
    weights = torch.randn(output_shape, generator=generator, dtype=inputs.dtype)

    def objective() -> torch.Tensor:
        return (module(inputs) * weights).sum()

    return objective, [(n, p) for n, p in module.named_parameters() if p.requires_grad]

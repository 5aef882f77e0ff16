#!/usr/bin/env python3
"""
Numerics Tests
Linear maps, MLPs, PReLU, batched products and the finite-difference gradient verifier.
"""

import sys
import os

import torch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.numerics.grad_check import grad_check, module_objective
from src.numerics.layers import MLP, LinearMap, PReLU, compose_maps, count_elements
from src.numerics.tensor_ops import DEFAULT_DTYPE, NumericError, ShapeError, batch_matmul, linear_apply, prelu


def test_linear_apply():
    """x W + b on the trailing extent, shape errors name both shapes"""
    linear = LinearMap(3, 2)
    with torch.no_grad():
        linear.weight.copy_(torch.tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], dtype=DEFAULT_DTYPE))
        linear.bias.copy_(torch.tensor([0.5, -0.5], dtype=DEFAULT_DTYPE))
    x = torch.tensor([[1.0, 2.0, 3.0]], dtype=DEFAULT_DTYPE)
    y = linear_apply(x, linear)
    assert torch.equal(y, torch.tensor([[4.5, 4.5]], dtype=DEFAULT_DTYPE))

    try:
        linear_apply(torch.zeros(2, 4, dtype=DEFAULT_DTYPE), linear)
        assert False, "mismatched extents must raise"
    except ShapeError as e:
        assert "(2, 4)" in str(e)
    print("✓ linear_apply")


def test_linear_apply_is_linear():
    torch.manual_seed(0)
    linear = LinearMap(5, 3, bias=False)
    x = torch.randn(2, 4, 5, dtype=DEFAULT_DTYPE)
    y = torch.randn(2, 4, 5, dtype=DEFAULT_DTYPE)
    with torch.no_grad():
        additive = linear_apply(x + y, linear) - (linear_apply(x, linear) + linear_apply(y, linear))
        homogeneous = linear_apply(2.5 * x, linear) - 2.5 * linear_apply(x, linear)
    assert additive.abs().max() <= 1e-12
    assert homogeneous.abs().max() <= 1e-12
    print("✓ linear_apply is additive and homogeneous")


def test_prelu():
    x = torch.tensor([-2.0, 0.0, 3.0], dtype=DEFAULT_DTYPE)
    assert torch.equal(prelu(x, 0.25), torch.tensor([-0.5, 0.0, 3.0], dtype=DEFAULT_DTYPE))
    assert torch.equal(PReLU()(x), torch.tensor([-0.5, 0.0, 3.0], dtype=DEFAULT_DTYPE))
    print("✓ prelu")


def test_batch_matmul():
    a = torch.randn(4, 2, 3, dtype=DEFAULT_DTYPE)
    b = torch.randn(4, 3, 5, dtype=DEFAULT_DTYPE)
    assert torch.allclose(batch_matmul(a, b), torch.einsum('bij,bjk->bik', a, b))
    for bad in (torch.randn(4, 4, 5, dtype=DEFAULT_DTYPE), torch.randn(3, 3, 5, dtype=DEFAULT_DTYPE),
                torch.randn(3, 5, dtype=DEFAULT_DTYPE)):
        try:
            batch_matmul(a, bad)
            assert False, "mismatched operands must raise"
        except ShapeError:
            pass
    print("✓ batch_matmul")


def test_mlp():
    """Hidden layers pass through PReLU, the last layer stays linear"""
    torch.manual_seed(0)
    net = MLP([3, 4, 2])
    x = torch.randn(5, 3, dtype=DEFAULT_DTYPE)
    hidden = prelu(linear_apply(x, net.layers[0]), net.slopes[0])
    expected = linear_apply(hidden, net.layers[1])
    assert torch.allclose(net(x), expected)
    assert len(net.slopes) == 1
    assert count_elements(net) == 3 * 4 + 4 + 4 * 2 + 2 + 1

    net.zero_()
    assert torch.equal(net(x), torch.zeros(5, 2, dtype=DEFAULT_DTYPE))
    try:
        MLP([3])
        assert False, "single-width MLP must raise"
    except ShapeError:
        pass
    print("✓ MLP")


def test_compose_maps():
    torch.manual_seed(1)
    first, second = LinearMap(3, 4), LinearMap(4, 2)
    with torch.no_grad():
        first.bias.normal_()
        second.bias.normal_()
    x = torch.randn(6, 3, dtype=DEFAULT_DTYPE)
    composed = compose_maps(first, second)
    assert torch.allclose(composed(x), second(first(x)), atol=1e-12)

    identity = LinearMap(3, 3, bias=False).identity_()
    assert torch.equal(identity(x), x)
    try:
        compose_maps(first, first)
        assert False, "non-chaining maps must raise"
    except ShapeError:
        pass
    print("✓ compose_maps")


def test_grad_check_passes():
    torch.manual_seed(2)
    w = torch.randn(3, 2, dtype=DEFAULT_DTYPE, requires_grad=True)
    x = torch.randn(4, 3, dtype=DEFAULT_DTYPE)
    report = {}
    error = grad_check(lambda: torch.tanh(x @ w).pow(2).sum(), [('w', w)], report=report)
    assert error < 1e-6
    assert set(report) == {'w'}
    print(f"✓ grad_check on tanh objective: {error:.2e}")


class _WrongSquare(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x):
        ctx.save_for_backward(x)
        return x * x

    @staticmethod
    def backward(ctx, grad):
        x, = ctx.saved_tensors
        return grad * x  # should be 2x


def test_grad_check_detects_wrong_gradient():
    w = torch.tensor([1.0, 2.0], dtype=DEFAULT_DTYPE, requires_grad=True)
    error = grad_check(lambda: _WrongSquare.apply(w).sum(), [w])
    assert error > 0.1
    print(f"✓ grad_check flags a wrong backward: {error:.2f}")


def test_grad_check_rejects_non_scalar():
    w = torch.ones(2, dtype=DEFAULT_DTYPE, requires_grad=True)
    try:
        grad_check(lambda: w * 2.0, [w])
        assert False, "vector objective must raise"
    except NumericError:
        pass
    print("✓ grad_check rejects non-scalar objectives")


def test_module_objective():
    torch.manual_seed(3)
    net = MLP([4, 3, 2])
    x = torch.randn(5, 4, dtype=DEFAULT_DTYPE)
    objective, params = module_objective(net, x)
    assert {name for name, _ in params} == {n for n, _ in net.named_parameters()}
    assert grad_check(objective, params) < 1e-4
    print("✓ module_objective")


if __name__ == "__main__":
    print("=" * 50)
    print("NUMERICS TESTS")
    print("=" * 50)
    test_linear_apply()
    test_linear_apply_is_linear()
    test_prelu()
    test_batch_matmul()
    test_mlp()
    test_compose_maps()
    test_grad_check_passes()
    test_grad_check_detects_wrong_gradient()
    test_grad_check_rejects_non_scalar()
    test_module_objective()
    print("\nAll numerics tests passed!")

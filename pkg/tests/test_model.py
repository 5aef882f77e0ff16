#!/usr/bin/env python3
"""
Model Tests
Configuration, forward shapes, ablation variants, parameter accounting and checkpoints.
"""

import sys
import os
import tempfile

import numpy as np
import torch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.motion import MotionSequence, duplicate_last_frame
from src.data.synthetic import SyntheticSpec, synth_dataset
from src.dynamic_gc.layers import DynamicSpatialGC, DynamicTemporalGC
from src.graphs.priors import build_prior_spatial_natural, build_prior_temporal_context
from src.graphs.skeleton import default_skeleton
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.config import ConfigError, ModelConfig, Variant
from src.model.network import build_comparison_stack, build_model, forward_model
from src.model.params import correlation_storage, count_params, model_params, unit_params
from src.numerics.tensor_ops import DEFAULT_DTYPE, ShapeError
from src.static_gc.convolutions import GCKind
from src.static_gc.layers import SpatialGC, TemporalGC


def _small_config(**overrides):
    values = dict(J=12, K=4, L=2, C=8, r=4, n_b=2, seed=3)
    values.update(overrides)
    return ModelConfig(**values).validate()


def test_config_validation():
    cfg = ModelConfig()
    assert cfg.T == cfg.K + cfg.L
    assert cfg.dtype == torch.float64
    for bad in (dict(J=0), dict(L=-1), dict(adjacency_init='ones'), dict(precision='float16'),
                dict(gc_kind=GCKind.STD, variant=Variant.E_STATIC_GC)):
        try:
            ModelConfig(**bad).validate()
            assert False, f"{bad} must raise"
        except ConfigError:
            pass
    print("✓ model config validation")


def test_variant_parse():
    assert Variant.parse('a') == Variant.A_CONSTRAINED_ONLY
    assert Variant.parse('G') == Variant.G_DT_ONLY
    assert Variant.parse('c_reversed_update') == Variant.C_REVERSED_UPDATE
    assert Variant.parse('full') == Variant.FULL
    try:
        Variant.parse('z')
        assert False, "unknown variant must raise"
    except ConfigError:
        pass
    print("✓ Variant.parse")


def test_config_dict_roundtrip():
    cfg = _small_config(variant=Variant.B_DYNAMIC_ONLY)
    values = cfg.to_dict()
    assert values['variant'] == 'b_dynamic_only' and values['gc_kind'] == cfg.gc_kind.value
    assert ModelConfig.from_dict(values) == cfg
    try:
        ModelConfig.from_dict({'J': 12, 'width': 3})
        assert False, "unknown key must raise"
    except ConfigError:
        pass
    print("✓ config to_dict / from_dict")


def test_forward_shape_and_zero_init():
    """The zero-initialized decode makes a fresh model predict the duplicated last pose"""
    cfg = _small_config()
    model = build_model(cfg)
    observed = torch.randn(3, cfg.J, cfg.K, cfg.D, dtype=DEFAULT_DTYPE)
    with torch.no_grad():
        prediction = model(observed)
    assert prediction.shape == (3, cfg.J, cfg.T, cfg.D)
    assert torch.equal(prediction, duplicate_last_frame(observed, cfg.L))
    assert len(model.units()) == cfg.n_b * cfg.n_c
    try:
        model(torch.randn(3, cfg.J, cfg.K + 1, cfg.D, dtype=DEFAULT_DTYPE))
        assert False, "wrong observed length must raise"
    except ShapeError:
        pass
    print("✓ forward shape and zero-init residual")


def test_duplicate_last_frame():
    x = torch.arange(6, dtype=DEFAULT_DTYPE).reshape(1, 3, 2)
    y = duplicate_last_frame(x, 2)
    assert y.shape == (1, 5, 2)
    assert torch.equal(y[0, 3], x[0, 2]) and torch.equal(y[0, 4], x[0, 2])
    assert torch.equal(duplicate_last_frame(x, 0), x)
    print("✓ duplicate_last_frame")


def test_forward_model_on_sequence():
    cfg = _small_config(n_b=1)
    model = build_model(cfg)
    observed = MotionSequence(torch.randn(cfg.J, cfg.K, cfg.D, dtype=DEFAULT_DTYPE).numpy(), 50.0)
    predicted = forward_model(model, observed)
    assert predicted.frames == cfg.T and predicted.fps == 50.0
    expected = duplicate_last_frame(torch.from_numpy(observed.values), cfg.L)
    assert torch.equal(torch.from_numpy(predicted.values), expected)
    try:
        forward_model(model, MotionSequence(observed.values[:, :2]))
        assert False, "short observation must raise"
    except ShapeError:
        pass
    print("✓ forward_model on one motion sequence")


def test_initial_feature_scale():
    """Default model on its own synthetic data: no block more than quadruples the feature range"""
    cfg = ModelConfig(seed=0)
    model = build_model(cfg)
    observed = torch.from_numpy(np.stack([obs.values for obs, _ in synth_dataset(SyntheticSpec(seed=0), 8)]))
    with torch.no_grad():
        h = model.encode(duplicate_last_frame(observed, cfg.L) / cfg.pose_scale)
        sizes = [float(h.abs().max())]
        for block in model.blocks:
            h = block(h)
            sizes.append(float(h.abs().max()))
    assert all(np.isfinite(sizes)) and sizes[0] > 0.0
    for before, after in zip(sizes, sizes[1:]):
        assert after <= 4.0 * before, sizes

    # Rescaling touches transforms only; correlations keep the unnormalized priors
    first = model.units()[0].layers()
    natural = build_prior_spatial_natural(default_skeleton(cfg.J)).a
    assert torch.equal(first[0].correlation.value, natural)
    assert torch.equal(first[-1].correlation.value, build_prior_temporal_context(cfg.T).a)
    print(f"✓ initial feature scale bounded {sizes[0]:.3g} -> {sizes[-1]:.3g}")


def test_seeded_construction():
    first = build_model(_small_config())
    second = build_model(_small_config())
    for (name, a), (_, b) in zip(first.named_parameters(), second.named_parameters()):
        assert torch.equal(a, b), name
    print("✓ seeded construction is deterministic")


def test_model_param_count():
    for kind in (GCKind.DSTD, GCKind.STD, GCKind.VSTD, GCKind.STS):
        cfg = _small_config(gc_kind=kind)
        assert count_params(cfg).total == model_params(cfg), kind
    print("✓ count_params equals the closed form")


def test_comparison_stack_counts():
    for kind in GCKind:
        stack = build_comparison_stack(kind, joints=4, frames=5, channels=6, units=2, reduction=2)
        assert count_params(stack).total == 2 * unit_params(kind, 4, 5, 6, 2), kind
    print("✓ comparison stacks match unit_params")


def test_full_scale_counts():
    assert unit_params(GCKind.DSTD, 25, 35, 64, 32) == 20065
    assert unit_params(GCKind.ST, 25, 35, 64, 32) == 773947
    assert 7 * unit_params(GCKind.DSTD, 25, 35, 64, 32) == 140455
    print("✓ unit counts at J=25, T=35, C=64")


def test_correlation_storage():
    assert correlation_storage(GCKind.DSTD, 22, 35) == 22 * 22 + 35 * 35
    assert correlation_storage(GCKind.STS, 22, 35) == 35 * 22 * 22 + 22 * 35 * 35
    assert correlation_storage(GCKind.ST, 2, 3) == 36
    print("✓ correlation storage")


def test_variant_structure():
    def layers_of(variant):
        model = build_model(_small_config(variant=variant))
        return model, model.units()[0].layers()

    _, layers = layers_of(Variant.E_STATIC_GC)
    assert sum(isinstance(layer, SpatialGC) for layer in layers) == 2
    assert sum(isinstance(layer, TemporalGC) for layer in layers) == 1

    _, layers = layers_of(Variant.F_DS_ONLY)
    assert all(isinstance(layer, DynamicSpatialGC) for layer in layers) and len(layers) == 3

    _, layers = layers_of(Variant.G_DT_ONLY)
    assert all(isinstance(layer, DynamicTemporalGC) for layer in layers) and len(layers) == 3

    model, layers = layers_of(Variant.A_CONSTRAINED_ONLY)
    assert all(not layer.head.alpha.requires_grad and float(layer.head.alpha) == 0.0 for layer in layers)
    assert count_params(model).frozen == len(layers) * len(model.units())

    _, layers = layers_of(Variant.B_DYNAMIC_ONLY)
    for layer in layers:
        assert not layer.correlation.trainable
        assert float(layer.correlation().abs().sum()) == 0.0
        assert float(layer.head.alpha) == 1.0

    _, layers = layers_of(Variant.C_REVERSED_UPDATE)
    assert all(layer.reversed_order for layer in layers)
    print("✓ ablation variant structure")


def test_checkpoint_roundtrip():
    cfg = _small_config(variant=Variant.C_REVERSED_UPDATE)
    model = build_model(cfg)
    with torch.no_grad():
        for param in model.parameters():
            param.add_(0.01)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'model.pt')
        save_checkpoint(model, path)
        restored, restored_cfg = load_checkpoint(path)
    assert restored_cfg == cfg
    for (name, a), (_, b) in zip(model.named_parameters(), restored.named_parameters()):
        assert torch.equal(a, b), name
    print("✓ checkpoint roundtrip")


def test_checkpoint_rejects_foreign_files():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'other.pt')
        torch.save({'format': 'something-else'}, path)
        try:
            load_checkpoint(path)
            assert False, "foreign checkpoint must raise"
        except ConfigError:
            pass

        model = build_model(_small_config())
        save_checkpoint(model, path)
        payload = torch.load(path)
        payload['parameters'].pop('decode.weight')
        torch.save(payload, path)
        try:
            load_checkpoint(path)
            assert False, "missing parameter must raise"
        except ConfigError as e:
            assert 'decode.weight' in str(e)
    print("✓ checkpoint validation")


if __name__ == "__main__":
    print("=" * 50)
    print("MODEL TESTS")
    print("=" * 50)
    test_config_validation()
    test_variant_parse()
    test_config_dict_roundtrip()
    test_forward_shape_and_zero_init()
    test_duplicate_last_frame()
    test_forward_model_on_sequence()
    test_initial_feature_scale()
    test_seeded_construction()
    test_model_param_count()
    test_comparison_stack_counts()
    test_full_scale_counts()
    test_correlation_storage()
    test_variant_structure()
    test_checkpoint_roundtrip()
    test_checkpoint_rejects_foreign_files()
    print("\nAll model tests passed!")

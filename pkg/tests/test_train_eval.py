#!/usr/bin/env python3
"""
Training and Evaluation Tests
MPJPE, zero-velocity baseline, horizon tables and the seeded training loop.
"""

import sys
import os
import tempfile

import numpy as np
import torch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.motion import HorizonError, MotionSequence
from src.data.synthetic import SyntheticSpec, synth_dataset
from src.model.config import ConfigError, ModelConfig
from src.model.network import build_model
from src.train_eval.evaluation import evaluate, evaluate_zero_velocity, horizon_frames
from src.train_eval.metrics import mpjpe, mpjpe_tensor, zero_velocity
from src.train_eval.trainer import LossSpan, TrainConfig, TrainingDivergedError, train, write_loss_csv

HORIZONS = (40, 80)


def _model_config():
    return ModelConfig(J=12, K=4, L=2, C=8, r=4, n_b=1, seed=1)


def _dataset(count=6, seed=0):
    return synth_dataset(SyntheticSpec(K=4, L=2, seed=seed), count)


def test_mpjpe():
    truth = MotionSequence(np.zeros((2, 3, 3)))
    shifted = MotionSequence(np.tile([3.0, 4.0, 0.0], (2, 3, 1)))
    assert mpjpe(shifted, truth) == 5.0
    assert mpjpe(truth, truth) == 0.0
    assert mpjpe(shifted, truth, (1, 2)) == 5.0
    for frame_range in ((2, 2), (0, 4)):
        try:
            mpjpe(shifted, truth, frame_range)
            assert False, f"{frame_range} must raise"
        except ValueError:
            pass
    try:
        mpjpe_tensor(torch.zeros(2, 3), torch.zeros(3, 2))
        assert False, "shape mismatch must raise"
    except ValueError:
        pass
    print("✓ mpjpe")


def test_mpjpe_rotation_invariance():
    rng = np.random.default_rng(11)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    rotation = q * np.sign(np.diag(r))
    if np.linalg.det(rotation) < 0:
        rotation[:, 0] *= -1.0
    pred = MotionSequence(rng.normal(scale=100.0, size=(4, 5, 3)))
    truth = MotionSequence(rng.normal(scale=100.0, size=(4, 5, 3)))
    rotated = mpjpe(MotionSequence(pred.values @ rotation.T), MotionSequence(truth.values @ rotation.T))
    assert abs(rotated - mpjpe(pred, truth)) <= 1e-9
    print("✓ mpjpe is invariant under a global rotation")


def test_mpjpe_gradient_at_zero_error():
    pred = torch.zeros(2, 3, 3, dtype=torch.float64, requires_grad=True)
    mpjpe_tensor(pred, torch.zeros(2, 3, 3, dtype=torch.float64)).backward()
    assert torch.all(torch.isfinite(pred.grad))
    print("✓ mpjpe gradient is finite at zero error")


def test_zero_velocity():
    observed = MotionSequence(np.arange(12, dtype=np.float64).reshape(2, 2, 3))
    future = zero_velocity(observed, 3)
    assert future.frames == 3
    for t in range(3):
        assert np.array_equal(future.values[:, t], observed.values[:, 1])
    print("✓ zero-velocity baseline")


def test_horizon_frames():
    assert list(horizon_frames((80, 160, 1000), 25, 25).items()) == [(80, 2), (160, 4), (1000, 25)]
    try:
        horizon_frames((80, 1000), 25, 10)
        assert False, "horizon beyond L must raise"
    except HorizonError:
        pass
    print("✓ horizon frame mapping")


def test_zero_init_model_matches_baseline():
    dataset = _dataset()
    model = build_model(_model_config())
    report = evaluate(model, dataset, HORIZONS, batch_size=4)
    baseline = evaluate_zero_velocity(dataset, HORIZONS)
    assert report.per_horizon == baseline.per_horizon
    assert report.frames == {40: 1, 80: 2}
    assert report.long_term is None and report.short_term == report.average
    assert report.forward_seconds >= 0.0
    print("✓ zero-initialized model evaluates as the baseline")


def test_cumulative_mode():
    dataset = _dataset()
    frame = evaluate_zero_velocity(dataset, HORIZONS, mode='frame')
    cumulative = evaluate_zero_velocity(dataset, HORIZONS, mode='cumulative')
    assert cumulative.per_horizon[40] == frame.per_horizon[40]
    expected = (frame.per_horizon[40] + frame.per_horizon[80]) / 2
    assert abs(cumulative.per_horizon[80] - expected) < 1e-9
    try:
        evaluate_zero_velocity(dataset, HORIZONS, mode='sum')
        assert False, "unknown mode must raise"
    except ValueError:
        pass
    print("✓ cumulative evaluation mode")


def test_short_and_long_term_averages():
    dataset = synth_dataset(SyntheticSpec(K=4, L=25, seed=2), 3)
    report = evaluate_zero_velocity(dataset, (80, 400, 560, 1000))
    assert abs(report.short_term - (report.per_horizon[80] + report.per_horizon[400]) / 2) < 1e-12
    assert abs(report.long_term - (report.per_horizon[560] + report.per_horizon[1000]) / 2) < 1e-12
    lines = report.key_values()
    assert lines[0].startswith("mpjpe_80ms=") and lines[-1] == "mode=frame"
    table = report.table().splitlines()
    assert len(table) == 2 and table[0].startswith("ms") and table[1].startswith("mpjpe")
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'eval.csv')
        report.write_csv(path)
        with open(path) as f:
            rows = f.read().splitlines()
    assert rows[0] == "horizon_ms,mpjpe" and len(rows) == 5
    print("✓ short- and long-term averages")


def test_train_config_validation():
    for bad in (dict(lr=0.0), dict(decay=1.5), dict(batch_size=0), dict(epochs=0), dict(decay_every=0)):
        try:
            TrainConfig(**bad).validate()
            assert False, f"{bad} must raise"
        except ConfigError:
            pass
    print("✓ train config validation")


def test_learning_rate_schedule():
    cfg = TrainConfig(lr=0.01, decay=0.5, decay_every=2, batch_size=4, epochs=5, seed=0)
    _, history = train(build_model(_model_config()), _dataset(), cfg)
    assert [r.epoch for r in history] == [1, 2, 3, 4, 5]
    assert np.allclose([r.lr for r in history], [0.01, 0.01, 0.005, 0.005, 0.0025])
    assert all(np.isfinite(r.loss) for r in history)
    print("✓ step learning-rate decay")


def test_training_is_deterministic():
    cfg = TrainConfig(lr=0.005, batch_size=4, epochs=2, seed=7, loss_span=LossSpan.FUTURE_ONLY)
    dataset = _dataset()
    first_model, first = train(build_model(_model_config()), dataset, cfg)
    second_model, second = train(build_model(_model_config()), dataset, cfg)
    assert [r.loss for r in first] == [r.loss for r in second]
    for (name, a), (_, b) in zip(first_model.named_parameters(), second_model.named_parameters()):
        assert torch.equal(a, b), name
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'loss.csv')
        write_loss_csv(first, path)
        with open(path) as f:
            rows = f.read().splitlines()
    assert rows[0] == "epoch,loss,lr" and rows[1].startswith("1,")
    print("✓ seeded training is deterministic")


def test_divergence_is_reported():
    model = build_model(_model_config())
    with torch.no_grad():
        model.encode.weight.fill_(float('nan'))
    try:
        train(model, _dataset(), TrainConfig(batch_size=4, epochs=1))
        assert False, "NaN loss must raise"
    except TrainingDivergedError as e:
        assert e.epoch == 1 and e.batch == 0
    print("✓ non-finite loss raises TrainingDivergedError")


def test_dataset_shape_mismatch():
    dataset = synth_dataset(SyntheticSpec(K=4, L=3), 2)
    try:
        train(build_model(_model_config()), dataset, TrainConfig(epochs=1))
        assert False, "mismatched dataset must raise"
    except ConfigError:
        pass
    print("✓ dataset/model mismatch")


if __name__ == "__main__":
    print("=" * 50)
    print("TRAIN / EVAL TESTS")
    print("=" * 50)
    test_mpjpe()
    test_mpjpe_rotation_invariance()
    test_mpjpe_gradient_at_zero_error()
    test_zero_velocity()
    test_horizon_frames()
    test_zero_init_model_matches_baseline()
    test_cumulative_mode()
    test_short_and_long_term_averages()
    test_train_config_validation()
    test_learning_rate_schedule()
    test_training_is_deterministic()
    test_divergence_is_reported()
    test_dataset_shape_mismatch()
    print("\nAll train/eval tests passed!")

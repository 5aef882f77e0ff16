#!/usr/bin/env python3
"""
Analysis Tests
Equivalence oracles, constraint classification, gradient checks, parameter accounting,
scaling benchmark and correlation inspection.
"""

import sys
import os
import tempfile

import numpy as np
import torch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import settings
from src.analysis.benchmark import bench_scaling, fit_slope, median_forward_seconds
from src.analysis.constraints import ConstraintStatus, check_constraints
from src.analysis.correlation import export_correlations, inspect_model, prior_agreement, top_connections
from src.analysis.suites import SuiteResult, desk_experiment, gradient_errors, suite_params
from src.analysis.verification import verify_dynamic_reduction, verify_factorization, verify_std_sts_equivalence
from src.graphs.adjacency import IndexConvention
from src.model.config import ModelConfig, Variant
from src.model.network import build_model
from src.static_gc.convolutions import GCKind, Order


def test_factorization_oracle():
    for seed in range(5):
        for order in Order:
            assert verify_factorization(seed, (3, 4, 2), reduction=1, order=order) <= settings.FACTORIZATION_TOLERANCE
    assert verify_factorization(0, (4, 5, 3), identity=True) == 0.0
    assert verify_factorization(0, (3, 4, 2), scale=1e3, relative=True) <= settings.FACTORIZATION_TOLERANCE
    print("✓ dynamic stacks factorize into one ST-GC")


def test_std_sts_equivalence():
    witness = 0.0
    for seed in range(5):
        source = verify_std_sts_equivalence(seed)
        assert source[IndexConvention.SOURCE_FRAME] <= settings.EQUIVALENCE_TOLERANCE
        temporal_first = verify_std_sts_equivalence(seed, order=Order.TEMPORAL_FIRST)
        assert temporal_first[IndexConvention.OUTPUT_JOINT_TEMPORAL] <= settings.EQUIVALENCE_TOLERANCE
        vanilla = verify_std_sts_equivalence(seed, vanilla=True)
        assert all(value <= 1e-12 for value in vanilla.values())
        witness = max(witness, source[IndexConvention.OUTPUT_FRAME])
    assert witness > settings.WITNESS_THRESHOLD
    print(f"✓ STD/STS equivalence, output_frame counterexample {witness:.2e}")


def test_dynamic_reduction_oracle():
    for seed in range(3):
        assert verify_dynamic_reduction(seed, (3, 4, 4), reduction=2) <= 1e-12
    print("✓ alpha = 0 dynamic layers equal static layers")


def test_constraints_dynamic():
    report = check_constraints(GCKind.DSTD)
    for name in ('c2', 'c3'):
        assert report.results[name].status == ConstraintStatus.VIOLATED
        assert report.results[name].witness is not None
    assert report.results['c1'].status == ConstraintStatus.HOLDS
    assert report.results['c4'].status == ConstraintStatus.HOLDS
    assert report.results['c5'].status == ConstraintStatus.HOLDS
    assert check_constraints(GCKind.DSTD).lines() == report.lines()
    assert report.lines()[0].startswith("dstd.c1=HOLDS")
    print("✓ DSTD: sample-specific and unshared, still factorizable")


def test_constraints_static():
    vanilla = check_constraints(GCKind.VSTD)
    assert vanilla.results['c2'].status == ConstraintStatus.HOLDS
    assert vanilla.results['c3'].status == ConstraintStatus.HOLDS
    assert vanilla.results['c4'].status == ConstraintStatus.NOT_APPLICABLE

    unshared = check_constraints(GCKind.STD)
    assert unshared.results['c2'].status == ConstraintStatus.VIOLATED
    assert unshared.results['c3'].status == ConstraintStatus.HOLDS

    single = check_constraints(GCKind.S)
    assert single.results['c1'].status == ConstraintStatus.NOT_APPLICABLE

    st = check_constraints(GCKind.ST)
    assert all(r.status == ConstraintStatus.NOT_APPLICABLE for r in st.results.values())
    try:
        check_constraints(GCKind.STD, samples=1)
        assert False, "one sample must raise"
    except ValueError:
        pass
    print("✓ static kinds share adjacencies across samples")


def test_gradient_errors():
    errors = gradient_errors([GCKind.S, GCKind.STS, GCKind.DSTD])
    assert set(errors) == {GCKind.S, GCKind.STS, GCKind.DSTD}
    for kind, error in errors.items():
        assert error < settings.GRAD_TOLERANCE, (kind, error)
    print("✓ analytic gradients agree with finite differences")


def test_suite_result():
    result = SuiteResult("demo")
    assert result.check(True, "first")
    assert not result.check(False, "second")
    assert not result.passed
    lines = result.lines()
    assert lines[0].startswith("[FAIL] demo")
    assert any("second" in line for line in lines[1:])
    print("✓ suite result bookkeeping")


def test_parameter_suite():
    result = suite_params()
    assert result.passed, "\n".join(result.lines())
    print("✓ comparison stacks match the catalogued counts")


def test_desk_learning_small():
    """Default unit structure on a reduced split: finite decreasing loss, better than both baselines"""
    full = desk_experiment(train_count=32, test_count=8, epochs=10, batch_size=8)
    dynamic_only = desk_experiment(variant=Variant.B_DYNAMIC_ONLY, train_count=32, test_count=8,
                                   epochs=10, batch_size=8)
    for run in (full, dynamic_only):
        assert all(np.isfinite(value) for value in run.values()), run
    assert full['final_loss'] < full['first_loss']
    assert full['model'] < full['zero_velocity']
    assert full['model'] < dynamic_only['model']
    print(f"✓ desk learning: full {full['model']:.2f}, dynamic-only {dynamic_only['model']:.2f}, "
          f"zero-velocity {full['zero_velocity']:.2f}")


def test_fit_slope():
    frames = [8, 16, 32, 64]
    assert abs(fit_slope(frames, [1e-6 * t ** 3 for t in frames]) - 3.0) < 1e-9
    assert abs(fit_slope(frames, [2e-3 * t for t in frames]) - 1.0) < 1e-9
    print("✓ log-log slope fit")


def test_median_forward_seconds():
    module = torch.nn.Identity()
    seconds = median_forward_seconds(module, torch.zeros(2), repetitions=3, warmup=1, min_seconds=1e-6, max_inner=4)
    assert seconds >= 0.0
    print("✓ median forward timing")


def test_bench_scaling_small():
    threads = torch.get_num_threads()
    report = bench_scaling(frames=(4, 6, 8, 10), channels=4, batch=2, joint_ratio=0.5,
                           repetitions=3, warmup=1, reduction=2, threads=1)
    assert torch.get_num_threads() == threads
    assert set(report.timings) == {'sts', 'dstd'}
    assert [t for t, _ in report.timings['dstd']] == [4, 6, 8, 10]
    assert report.ratio > 0.0 and np.isfinite(report.slopes['sts'])
    lines = report.lines()
    assert any(line.startswith("host.logical_cores=") for line in lines)
    assert lines[-1].startswith("ratio_dstd_sts=")
    with tempfile.TemporaryDirectory() as tmp:
        paths = report.write_csv(tmp)
        assert len(paths) == 2
        with open(paths[0]) as f:
            rows = f.read().splitlines()
    assert rows[0] == "T,seconds" and len(rows) == 5
    try:
        bench_scaling(frames=(4, 6, 8))
        assert False, "three lengths must raise"
    except ValueError:
        pass
    print("✓ scaling benchmark")


def test_top_connections():
    matrix = torch.tensor([[0.0, 5.0, 1.0], [2.0, 0.0, 3.0], [4.0, 6.0, 0.0]], dtype=torch.float64)
    assert top_connections(matrix, 1) == [[2], [2], [1]]
    assert top_connections(matrix, 5) == [[2, 1], [2, 0], [1, 0]]
    prior = torch.zeros(3, 3, dtype=torch.float64)
    prior[2, 0] = prior[1, 2] = 1.0
    assert abs(prior_agreement(matrix, prior, 1) - 2 / 3) < 1e-12
    assert prior_agreement(matrix, torch.rand(3, 3, dtype=torch.float64), 1) is None
    assert prior_agreement(matrix, torch.eye(3, dtype=torch.float64), 1) is None
    assert top_connections(torch.ones(1, 1), 3) == [[]]
    print("✓ top connections and prior agreement")


def test_inspect_and_export():
    cfg = ModelConfig(J=12, K=4, L=2, C=8, r=4, n_b=2)
    model = build_model(cfg)
    summaries = inspect_model(model, 2)
    assert len(summaries) == cfg.n_b * (cfg.spatial_branches + 1)
    assert sum(s.axis == 'temporal' for s in summaries) == cfg.n_b
    for summary in summaries:
        assert 0.0 <= summary.agreement <= 1.0
        assert all(len(row) == 2 for row in summary.top)
    with tempfile.TemporaryDirectory() as tmp:
        paths = export_correlations(model, tmp)
        assert len(paths) == len(summaries)
        shapes = sorted(np.loadtxt(p, delimiter=',').shape for p in paths)
    assert shapes[0] == (cfg.T, cfg.T) and shapes[-1] == (cfg.J, cfg.J)

    for variant in (Variant.D_NO_PRIOR, Variant.B_DYNAMIC_ONLY):
        unprimed = build_model(ModelConfig(J=12, K=4, L=2, C=8, r=4, n_b=1, variant=variant))
        assert all(s.agreement is None for s in inspect_model(unprimed, 2)), variant
    print("✓ correlation inspection and export")


if __name__ == "__main__":
    print("=" * 50)
    print("ANALYSIS TESTS")
    print("=" * 50)
    test_factorization_oracle()
    test_std_sts_equivalence()
    test_dynamic_reduction_oracle()
    test_constraints_dynamic()
    test_constraints_static()
    test_gradient_errors()
    test_suite_result()
    test_parameter_suite()
    test_desk_learning_small()
    test_fit_slope()
    test_median_forward_seconds()
    test_bench_scaling_small()
    test_top_connections()
    test_inspect_and_export()
    print("\nAll analysis tests passed!")

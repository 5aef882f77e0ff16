#!/usr/bin/env python3
"""
Data Tests
MSEQ parsing, manifests, horizon mapping and the synthetic kinematic generator.
"""

import sys
import os
import tempfile

import numpy as np

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.motion import (HorizonError, MotionSequence, MseqParseError, duplicate_last_pose, format_mseq,
                             load_split, ms_to_frame, parse_mseq, read_manifest, read_mseq, split_observed_future,
                             write_manifest, write_mseq)
from src.data.synthetic import SyntheticSpec, SyntheticSpecError, rest_pose, synth_dataset


def _sequence(joints=2, frames=3, dims=3, fps=25.0):
    values = np.arange(joints * frames * dims, dtype=np.float64).reshape(joints, frames, dims) / 7.0
    return MotionSequence(values, fps)


def test_mseq_layout():
    """Each frame line is joint-major with coordinates innermost"""
    seq = _sequence()
    lines = format_mseq(seq).splitlines()
    assert lines[0] == "mseq v1 2 3 3 25"
    first = [float(v) for v in lines[1].split()]
    assert first == list(seq.values[:, 0, :].reshape(-1))
    assert parse_mseq(format_mseq(seq)).equals(seq)
    print("✓ MSEQ layout")


def test_mseq_parse_errors():
    header = "mseq v1 1 2 2 25\n"
    cases = {
        "": 1,
        "mseq v2 1 2 2 25\n1 2\n3 4\n": 1,
        "mseq v1 1 2 2 -1\n1 2\n3 4\n": 1,
        header + "1 2\n": 3,
        header + "1 2 3\n3 4\n": 2,
        header + "1 x\n3 4\n": 2,
        header + "1 2\n3 nan\n": 3,
        header + "1 2\n3 4\n5 6\n": 4,
    }
    for text, line in cases.items():
        try:
            parse_mseq(text)
            assert False, f"{text!r} must raise"
        except MseqParseError as e:
            assert e.line == line, (text, e.line)
            assert str(e).startswith(f"line {line}:")
    assert parse_mseq(header + "1 2\n3 4\n\n\n").frames == 2
    print("✓ MSEQ parse errors carry line numbers")


def test_motion_sequence_validation():
    for values in (np.zeros((2, 3)), np.zeros((2, 0, 3)), np.full((1, 1, 3), np.inf)):
        try:
            MotionSequence(values)
            assert False, "invalid values must raise"
        except ValueError:
            pass
    seq = _sequence(frames=5)
    assert seq.slice(1, 3).frames == 2
    assert not seq.equals(MotionSequence(seq.values, 50.0))
    print("✓ motion sequence validation")


def test_manifest_relative_paths():
    with tempfile.TemporaryDirectory() as tmp:
        os.makedirs(os.path.join(tmp, 'train'))
        path = os.path.join(tmp, 'train', 'a.mseq')
        write_mseq(_sequence(), path)
        manifest = os.path.join(tmp, 'manifest.txt')
        write_manifest({'train': [path]}, manifest)
        with open(manifest) as f:
            assert f.read() == f"train {os.path.join('train', 'a.mseq')}\n"
        entries = read_manifest(manifest)
        assert entries['train'] == [os.path.abspath(path)] and entries['test'] == []
        loaded = load_split(manifest, 'train')
        assert len(loaded) == 1 and loaded[0].equals(read_mseq(path))

        with open(manifest, 'w') as f:
            f.write("# comment\n\nholdout x.mseq\n")
        try:
            read_manifest(manifest)
            assert False, "unknown split must raise"
        except MseqParseError as e:
            assert e.line == 3
    print("✓ manifest paths resolve against the manifest directory")


def test_split_and_duplicate():
    seq = _sequence(frames=6)
    observed, future = split_observed_future(seq, 4, 2)
    assert observed.frames == 4 and future.frames == 2
    assert np.array_equal(future.values, seq.values[:, 4:6])
    try:
        split_observed_future(seq, 4, 3)
        assert False, "short sequence must raise"
    except ValueError:
        pass
    padded = duplicate_last_pose(observed, 3)
    assert padded.frames == 7
    assert np.array_equal(padded.values[:, 6], observed.values[:, 3])
    assert duplicate_last_pose(observed, 0).equals(observed)
    try:
        duplicate_last_pose(observed, -1)
        assert False, "negative count must raise"
    except ValueError:
        pass
    print("✓ observed/future split and last-pose duplication")


def test_ms_to_frame():
    assert ms_to_frame(80, 25) == 2
    assert ms_to_frame(160, 25) == 4
    assert ms_to_frame(560, 25) == 14
    assert ms_to_frame(1000, 25) == 25
    assert ms_to_frame(20, 25) == 1
    for ms in (10, 0, -40):
        try:
            ms_to_frame(ms, 25)
            assert False, f"{ms} ms must raise"
        except HorizonError:
            pass
    for fps in (12.5, 25, 50):
        frames = [ms_to_frame(ms, fps) for ms in range(40, 2001, 7)]
        assert all(a <= b for a, b in zip(frames, frames[1:])), fps
    print("✓ ms_to_frame")


def test_synthetic_determinism():
    spec = SyntheticSpec(K=4, L=3, seed=5)
    first = synth_dataset(spec, 3)
    second = synth_dataset(SyntheticSpec(K=4, L=3, seed=5), 3)
    assert len(first) == 3
    for (obs_a, fut_a), (obs_b, fut_b) in zip(first, second):
        assert obs_a.equals(obs_b) and fut_a.equals(fut_b)
        assert obs_a.values.shape == (12, 4, 3) and fut_a.values.shape == (12, 3, 3)
    other = synth_dataset(SyntheticSpec(K=4, L=3, seed=6), 3)
    assert not first[0][0].equals(other[0][0])
    assert np.array_equal(rest_pose(spec), rest_pose(SyntheticSpec(seed=6)))
    print("✓ synthetic data is seeded")


def test_synthetic_motion_follows_chains():
    """Without noise, joints outside every chain stay at rest"""
    spec = SyntheticSpec(J=14, K=5, L=5, noise=0.0)
    observed, future = synth_dataset(spec, 1)[0]
    rest = rest_pose(spec)
    for j in (12, 13):
        assert np.allclose(observed.values[j], rest[j][None, :])
    assert np.abs(observed.values[6] - rest[6][None, :]).max() > 1.0
    assert np.abs(observed.values[6] - rest[6]).max() <= spec.amplitudes[3] * (1 + spec.amplitude_jitter) + 1e-9
    print("✓ synthetic chains oscillate around the rest pose")


def test_synthetic_validation():
    for bad in (dict(J=4), dict(chains=((0, 1), (1, 2)), frequencies=(1.0, 1.0), amplitudes=(1.0, 1.0)),
                dict(frequencies=(1.0,)), dict(noise=-1.0), dict(L=0), dict(chains=())):
        try:
            SyntheticSpec(**bad).validate()
            assert False, f"{bad} must raise"
        except SyntheticSpecError:
            pass
    print("✓ synthetic spec validation")


if __name__ == "__main__":
    print("=" * 50)
    print("DATA TESTS")
    print("=" * 50)
    test_mseq_layout()
    test_mseq_parse_errors()
    test_motion_sequence_validation()
    test_manifest_relative_paths()
    test_split_and_duplicate()
    test_ms_to_frame()
    test_synthetic_determinism()
    test_synthetic_motion_follows_chains()
    test_synthetic_validation()
    print("\nAll data tests passed!")

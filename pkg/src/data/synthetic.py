"""
Synthetic Kinematic Data
Seeded sinusoidal joint chains for desk-scale training: every joint of a chain oscillates
around its rest position with the chain's frequency, lagging its predecessor by a fixed phase.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from config import settings

from .motion import MotionSequence, split_observed_future

logger = logging.getLogger(__name__)

# Chains of the shipped 12-joint skeleton: torso, legs, arms
DEFAULT_CHAINS = ((0, 1), (2, 3), (4, 5), (6, 7, 8), (9, 10, 11))

# Phase offset between x, y and z of one joint
COORDINATE_PHASE = 2.0 * math.pi / 3.0
REST_POSE_SPREAD = 500.0  # Millimeters


class SyntheticSpecError(ValueError):
    """Raised for unusable synthetic data specifications."""


def _default_frequencies() -> Tuple[float, ...]:
    return tuple(settings.SYNTH_BASE_FREQUENCY + i * settings.SYNTH_FREQUENCY_STEP for i in range(len(DEFAULT_CHAINS)))


def _default_amplitudes() -> Tuple[float, ...]:
    return tuple(settings.SYNTH_AMPLITUDE for _ in DEFAULT_CHAINS)


@dataclass
class SyntheticSpec:
    """
    Synthetic dataset description.

    Per sample, each chain draws a phase offset in [0, phase_jitter) and an amplitude scale in
    [1 - amplitude_jitter, 1 + amplitude_jitter]; joints outside every chain stay at rest.
    """
    J: int = settings.SYNTH_JOINTS
    K: int = settings.OBSERVED_FRAMES
    L: int = settings.PREDICTED_FRAMES
    fps: float = settings.FRAME_RATE
    chains: Sequence[Sequence[int]] = DEFAULT_CHAINS
    frequencies: Sequence[float] = field(default_factory=_default_frequencies)
    amplitudes: Sequence[float] = field(default_factory=_default_amplitudes)
    phase_lag: float = settings.SYNTH_PHASE_LAG
    noise: float = settings.SYNTH_NOISE
    phase_jitter: float = 2.0 * math.pi
    amplitude_jitter: float = 0.25
    seed: int = settings.SEED
    rest_seed: int = 0

    def validate(self) -> "SyntheticSpec":
        if not self.chains or any(len(chain) == 0 for chain in self.chains):
            raise SyntheticSpecError("synthetic data needs at least one non-empty chain")
        seen = set()
        for chain in self.chains:
            for j in chain:
                if not 0 <= j < self.J:
                    raise SyntheticSpecError(f"chain joint {j} out of range for {self.J} joints")
                if j in seen:
                    raise SyntheticSpecError(f"joint {j} belongs to more than one chain")
                seen.add(j)
        if len(self.frequencies) != len(self.chains) or len(self.amplitudes) != len(self.chains):
            raise SyntheticSpecError(
                f"{len(self.chains)} chains need as many frequencies and amplitudes, "
                f"got {len(self.frequencies)} and {len(self.amplitudes)}"
            )
        if any(a < 0 for a in self.amplitudes) or self.noise < 0:
            raise SyntheticSpecError("amplitudes and noise must be non-negative")
        if self.K < 1 or self.L < 1 or not self.fps > 0:
            raise SyntheticSpecError(f"invalid extents K={self.K} L={self.L} fps={self.fps}")
        return self


def rest_pose(spec: SyntheticSpec) -> np.ndarray:
    """Rest positions c_j (J x 3), shared by every sample of every split."""
    rng = np.random.default_rng(spec.rest_seed)
    return rng.uniform(-REST_POSE_SPREAD, REST_POSE_SPREAD, size=(spec.J, 3))


def synth_sequence(spec: SyntheticSpec, rng: np.random.Generator, rest: np.ndarray) -> MotionSequence:
    """One K + L frame sequence."""
    frames = spec.K + spec.L
    t = np.arange(frames, dtype=np.float64) / spec.fps
    coordinate_phase = np.arange(3, dtype=np.float64) * COORDINATE_PHASE
    values = np.repeat(rest[:, None, :], frames, axis=1)

    for chain, frequency, amplitude in zip(spec.chains, spec.frequencies, spec.amplitudes):
        phase = rng.uniform(0.0, spec.phase_jitter) if spec.phase_jitter > 0 else 0.0
        scale = rng.uniform(1.0 - spec.amplitude_jitter, 1.0 + spec.amplitude_jitter) if spec.amplitude_jitter > 0 else 1.0
        for k, j in enumerate(chain):
            angle = 2.0 * math.pi * frequency * t[:, None] + phase + k * spec.phase_lag + coordinate_phase[None, :]
            values[j] = rest[j] + amplitude * scale * np.sin(angle)

    if spec.noise > 0:
        values = values + rng.normal(0.0, spec.noise, size=values.shape)
    return MotionSequence(values, spec.fps)


def synth_dataset(spec: SyntheticSpec, count: int) -> List[Tuple[MotionSequence, MotionSequence]]:
    """
    Deterministic list of (observed K frames, future L frames) pairs.

    Args:
        spec: Dataset description; spec.seed drives every per-sample draw
        count: Number of sequences
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    rest = rest_pose(spec)
    pairs = [split_observed_future(synth_sequence(spec, rng, rest), spec.K, spec.L) for _ in range(count)]
    logger.info(f"Synthesized {count} sequences: J={spec.J} K={spec.K} L={spec.L} seed={spec.seed}")
    return pairs

"""
Motion Sequences
In-memory pose sequences, MSEQ text I/O, dataset manifests and horizon arithmetic.

MSEQ format:
    mseq v1 J T D fps
    <T lines, each J*D floats: joint-major, coordinates innermost>
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import torch

from src.numerics.tensor_ops import ShapeError

logger = logging.getLogger(__name__)

MSEQ_MAGIC = 'mseq'
MSEQ_VERSION = 'v1'
SPLITS = ('train', 'val', 'test')


class MseqParseError(ValueError):
    """Malformed MSEQ or manifest content; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class HorizonError(ValueError):
    """Horizon that maps to no future frame or lies beyond the predicted window."""


@dataclass(eq=False)
class MotionSequence:
    """J x T x D joint positions (millimeters by convention) sampled at fps."""
    values: np.ndarray
    fps: float = 25.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError(f"motion values must be shaped (J, T, D), got {self.values.shape}")
        if self.values.shape[1] < 1:
            raise ValueError("motion sequence needs at least one frame")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("motion sequence has non-finite values")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")

    @property
    def joints(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]

    @property
    def dims(self) -> int:
        return self.values.shape[2]

    def slice(self, start: int, stop: int) -> "MotionSequence":
        return MotionSequence(self.values[:, start:stop].copy(), self.fps)

    def equals(self, other: "MotionSequence") -> bool:
        """Exact equality of values, shape and fps."""
        return (self.fps == other.fps and self.values.shape == other.values.shape
                and bool(np.array_equal(self.values, other.values)))


def format_mseq(seq: MotionSequence) -> str:
    lines = [f"{MSEQ_MAGIC} {MSEQ_VERSION} {seq.joints} {seq.frames} {seq.dims} {seq.fps:.17g}"]
    for t in range(seq.frames):
        lines.append(" ".join(f"{v:.17g}" for v in seq.values[:, t, :].reshape(-1)))
    return "\n".join(lines) + "\n"


def parse_mseq(text: str) -> MotionSequence:
    lines = text.splitlines()
    if not lines:
        raise MseqParseError("empty file, expected header 'mseq v1 J T D fps'", 1)
    header = lines[0].split()
    if len(header) != 6 or header[0] != MSEQ_MAGIC or header[1] != MSEQ_VERSION:
        raise MseqParseError(f"malformed header '{lines[0]}', expected 'mseq v1 J T D fps'", 1)
    try:
        joints, frames, dims = int(header[2]), int(header[3]), int(header[4])
        fps = float(header[5])
    except ValueError:
        raise MseqParseError(f"malformed header '{lines[0]}'", 1)
    if joints < 1 or frames < 1 or dims < 1 or not (math.isfinite(fps) and fps > 0):
        raise MseqParseError(f"header extents must be positive, got '{lines[0]}'", 1)

    values = np.empty((frames, joints * dims), dtype=np.float64)
    for t in range(frames):
        line_no = t + 2
        if line_no > len(lines):
            raise MseqParseError(f"missing frame line {t + 1} of {frames}", line_no)
        tokens = lines[line_no - 1].split()
        if len(tokens) != joints * dims:
            raise MseqParseError(f"expected {joints * dims} values, got {len(tokens)}", line_no)
        try:
            row = [float(tok) for tok in tokens]
        except ValueError as e:
            raise MseqParseError(str(e), line_no)
        if not all(math.isfinite(v) for v in row):
            raise MseqParseError("non-finite value", line_no)
        values[t] = row

    extra = [i for i in range(frames + 1, len(lines)) if lines[i].strip()]
    if extra:
        raise MseqParseError(f"unexpected content after {frames} frames", extra[0] + 1)

    return MotionSequence(values.reshape(frames, joints, dims).transpose(1, 0, 2).copy(), fps)


def read_mseq(path: str) -> MotionSequence:
    with open(path, 'r') as f:
        return parse_mseq(f.read())


def write_mseq(seq: MotionSequence, path: str) -> None:
    with open(path, 'w') as f:
        f.write(format_mseq(seq))


def read_manifest(path: str) -> Dict[str, List[str]]:
    """Manifest lines `train|val|test <path>`; relative paths resolve against the manifest directory."""
    base = os.path.dirname(os.path.abspath(path))
    entries = {split: [] for split in SPLITS}
    with open(path, 'r') as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            parts = line.split(maxsplit=1)
            if len(parts) != 2 or parts[0] not in SPLITS:
                raise MseqParseError(f"expected 'train|val|test <path>', got '{line}'", line_no)
            entries[parts[0]].append(os.path.join(base, parts[1]))
    return entries


def write_manifest(entries: Dict[str, List[str]], path: str) -> None:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, 'w') as f:
        for split in SPLITS:
            for entry in entries.get(split, []):
                f.write(f"{split} {os.path.relpath(os.path.abspath(entry), base)}\n")


def load_split(manifest_path: str, split: str) -> List[MotionSequence]:
    paths = read_manifest(manifest_path)[split]
    sequences = [read_mseq(p) for p in paths]
    logger.info(f"Loaded {len(sequences)} {split} sequences from {manifest_path}")
    return sequences


def duplicate_last_frame(x: torch.Tensor, count: int) -> torch.Tensor:
    """Append `count` copies of the last frame: (..., J, K, D) -> (..., J, K + count, D)."""
    if count < 0:
        raise ShapeError(f"duplicate count must be non-negative, got {count}")
    tail = x[..., -1:, :].expand(*x.shape[:-2], count, x.shape[-1])
    return torch.cat([x, tail], dim=-2)


def duplicate_last_pose(seq: MotionSequence, count: int) -> MotionSequence:
    """Append `count` copies of the last frame."""
    values = duplicate_last_frame(torch.from_numpy(seq.values), count)
    return MotionSequence(values.numpy(), seq.fps)


def split_observed_future(seq: MotionSequence, observed: int,
                          predicted: int) -> Tuple[MotionSequence, MotionSequence]:
    """First `observed` frames and the `predicted` frames after them."""
    if seq.frames < observed + predicted:
        raise ValueError(f"sequence has {seq.frames} frames, need {observed + predicted}")
    return seq.slice(0, observed), seq.slice(observed, observed + predicted)


def ms_to_frame(ms: float, fps: float) -> int:
    """1-based future frame offset of a horizon, rounded to the nearest frame."""
    if not ms > 0 or not fps > 0:
        raise HorizonError(f"horizon and fps must be positive, got {ms} ms at {fps} fps")
    frame = int(math.floor(ms * fps / 1000.0 + 0.5))
    if frame == 0:
        raise HorizonError(f"horizon {ms} ms is shorter than one frame at {fps} fps")
    return frame

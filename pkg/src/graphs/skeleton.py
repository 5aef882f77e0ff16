"""
Skeleton Specification
Line-oriented skeleton files describing joints, bones, limb groups and mirrored limbs.

File format:
    # comment
    joints N
    bone p q
    limb NAME j1 j2 ...
    mirror NAME1 NAME2
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

logger = logging.getLogger(__name__)

SKELETON_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
                            'config', 'skeletons')

# Shipped skeletons by joint count (repository convention, not dataset ground truth)
DEFAULT_SKELETON_FILES = {
    12: 'synthetic_12.skel',
    22: 'h36m_22.skel',
    25: 'cmu_25.skel',
}


class SkeletonSpecError(ValueError):
    """Raised for malformed or inconsistent skeleton specifications."""


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint count, bones, limb groups and mirror pairs of a skeleton."""
    joint_count: int
    bone_edges: Tuple[Tuple[int, int], ...] = ()
    limb_groups: Tuple[Tuple[str, Tuple[int, ...]], ...] = ()
    mirror_pairs: Tuple[Tuple[str, str], ...] = ()
    comments: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.joint_count < 1:
            raise SkeletonSpecError(f"joint count must be positive, got {self.joint_count}")
        for p, q in self.bone_edges:
            self._check_index(p)
            self._check_index(q)
            if p == q:
                raise SkeletonSpecError(f"bone ({p},{q}) is a self-loop; self-loops are added programmatically")
        names = set()
        for name, joints in self.limb_groups:
            if name in names:
                raise SkeletonSpecError(f"limb group '{name}' defined twice")
            names.add(name)
            for j in joints:
                self._check_index(j)
        for first, second in self.mirror_pairs:
            for name in (first, second):
                if name not in names:
                    raise SkeletonSpecError(f"mirror references unknown limb group '{name}'")

    def _check_index(self, j: int) -> None:
        if not 0 <= j < self.joint_count:
            raise SkeletonSpecError(f"joint index {j} out of range for {self.joint_count} joints")

    def limb(self, name: str) -> Tuple[int, ...]:
        for group_name, joints in self.limb_groups:
            if group_name == name:
                return joints
        raise SkeletonSpecError(f"unknown limb group '{name}'")

    def degrees(self) -> Dict[int, int]:
        """Undirected bone degree per joint."""
        degree = {j: 0 for j in range(self.joint_count)}
        for p, q in set(tuple(sorted(e)) for e in self.bone_edges):
            degree[p] += 1
            degree[q] += 1
        return degree


def parse_skeleton(text: str) -> SkeletonSpec:
    """Parse skeleton file contents."""
    joint_count: Optional[int] = None
    bones = []
    limbs = []
    mirrors = []
    comments = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            comments.append(raw)
            continue
        tokens = line.split()
        keyword, args = tokens[0], tokens[1:]
        try:
            if keyword == 'joints':
                if len(args) != 1:
                    raise SkeletonSpecError("expected 'joints N'")
                joint_count = int(args[0])
            elif keyword == 'bone':
                if len(args) != 2:
                    raise SkeletonSpecError("expected 'bone p q'")
                bones.append((int(args[0]), int(args[1])))
            elif keyword == 'limb':
                if len(args) < 2:
                    raise SkeletonSpecError("expected 'limb NAME j1 ...'")
                limbs.append((args[0], tuple(int(a) for a in args[1:])))
            elif keyword == 'mirror':
                if len(args) != 2:
                    raise SkeletonSpecError("expected 'mirror NAME1 NAME2'")
                mirrors.append((args[0], args[1]))
            else:
                raise SkeletonSpecError(f"unknown keyword '{keyword}'")
        except ValueError as e:
            raise SkeletonSpecError(f"line {line_no}: {e}") from e

    if joint_count is None:
        raise SkeletonSpecError("missing 'joints N' line")
    return SkeletonSpec(joint_count, tuple(bones), tuple(limbs), tuple(mirrors), tuple(comments))


def format_skeleton(spec: SkeletonSpec) -> str:
    """Render a skeleton in canonical file form (comments, joints, bones, limbs, mirrors)."""
    lines = list(spec.comments)
    lines.append(f"joints {spec.joint_count}")
    lines.extend(f"bone {p} {q}" for p, q in spec.bone_edges)
    lines.extend(f"limb {name} " + " ".join(str(j) for j in joints) for name, joints in spec.limb_groups)
    lines.extend(f"mirror {a} {b}" for a, b in spec.mirror_pairs)
    return "\n".join(lines) + "\n"


def read_skeleton(path: str) -> SkeletonSpec:
    with open(path, 'r') as f:
        spec = parse_skeleton(f.read())
    logger.info(f"Loaded skeleton {os.path.basename(path)}: {spec.joint_count} joints, "
                f"{len(spec.bone_edges)} bones, {len(spec.limb_groups)} limbs")
    return spec


def write_skeleton(spec: SkeletonSpec, path: str) -> None:
    with open(path, 'w') as f:
        f.write(format_skeleton(spec))


def chain_skeleton(joint_count: int) -> SkeletonSpec:
    """Fallback skeleton: joints connected in index order, no limb groups."""
    bones = tuple((j, j + 1) for j in range(joint_count - 1))
    return SkeletonSpec(joint_count, bones)


def default_skeleton(joint_count: int) -> SkeletonSpec:
    """Shipped skeleton for the joint count, or a chain skeleton when none is shipped."""
    filename = DEFAULT_SKELETON_FILES.get(joint_count)
    if filename is None:
        logger.warning(f"No shipped skeleton for {joint_count} joints, using chain skeleton")
        return chain_skeleton(joint_count)
    return read_skeleton(os.path.join(SKELETON_DIR, filename))

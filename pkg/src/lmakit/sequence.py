"""Joint sequence data model and JSONL (de)serialization.

File format: line 1 is a JSON header
    {"format_version": 1, "fps": 60, "units": "meters",
     "joints": [...], "roles": {role: joint_name}, "weights": {joint_name: alpha},
     "label": ..., "group_id": ...}
and every following line is one frame: a JSON array of J [x, y, z] triplets
in meters.  NaN coordinates are encoded as null.
"""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GapError, SequenceFormatError, SkeletonError
from .skeleton import SkeletonSpec, default_weight_for

FORMAT_VERSION = 1


@dataclass(frozen=True)
class JointSequence:
    """T x J x 3 joint positions (meters) sampled uniformly at `fps` Hz."""

    fps: float
    positions: np.ndarray = field(repr=False)
    skeleton: SkeletonSpec
    label: str | None = None
    group_id: str = ""

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if self.fps <= 0:
            raise SequenceFormatError(f"fps must be > 0, got {self.fps}")
        if pos.ndim != 3 or pos.shape[2] != 3:
            raise SequenceFormatError(f"positions must be T x J x 3, got {pos.shape}")
        if pos.shape[0] < 2:
            raise SequenceFormatError("T >= 2 required")
        if pos.shape[1] != self.skeleton.n_joints:
            raise SequenceFormatError(
                f"joint count {pos.shape[1]} does not match skeleton "
                f"({self.skeleton.n_joints})"
            )
        pos.setflags(write=False)

    @property
    def n_frames(self):
        return self.positions.shape[0]

    @property
    def n_joints(self):
        return self.positions.shape[1]

    @property
    def dt(self):
        return 1.0 / self.fps

    def joint(self, role):
        """T x 3 track of the joint playing `role`."""
        return self.positions[:, self.skeleton.index(role), :]

    def require_finite(self):
        if not np.all(np.isfinite(self.positions)):
            raise SequenceFormatError(
                "sequence contains NaN/Inf; run validate_and_repair first"
            )
        return self


def _parse_header(obj, path):
    if obj.get("format_version") != FORMAT_VERSION:
        raise SequenceFormatError(
            f"unsupported format_version {obj.get('format_version')!r}", path, 1
        )
    if obj.get("units") != "meters":
        raise SequenceFormatError(
            f"units must be 'meters', got {obj.get('units')!r}", path, 1
        )
    fps = obj.get("fps")
    if not isinstance(fps, (int, float)) or fps <= 0:
        raise SequenceFormatError(f"invalid fps {fps!r}", path, 1)
    joints = obj.get("joints")
    if not joints or not all(isinstance(j, str) for j in joints):
        raise SequenceFormatError("header must list joint names", path, 1)
    roles = obj.get("roles")
    if not isinstance(roles, dict):
        raise SequenceFormatError("header must carry a roles mapping", path, 1)
    name_to_idx = {n: i for i, n in enumerate(joints)}
    role_map = {}
    for role, name in roles.items():
        if name not in name_to_idx:
            raise SequenceFormatError(
                f"role '{role}' names unknown joint '{name}'", path, 1
            )
        role_map[role] = name_to_idx[name]
    weights_in = obj.get("weights", {})
    weights = np.array(
        [float(weights_in.get(n, default_weight_for(n))) for n in joints]
    )
    try:
        skel = SkeletonSpec(tuple(joints), role_map, weights)
    except SkeletonError as e:
        raise SequenceFormatError(str(e), path, 1) from e
    return fps, skel, obj.get("label"), obj.get("group_id", "")


def load_sequence(path, skeleton=None):
    """Parse a sequence JSONL file.

    When `skeleton` is given, joint columns are reordered by name to match
    its ordering (extra file joints are rejected only if a required name is
    missing).
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SequenceFormatError("empty file", path)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SequenceFormatError(f"bad header JSON: {e}", path, 1) from e
    fps, skel, label, group_id = _parse_header(header, path)

    frames = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise SequenceFormatError(f"bad frame JSON: {e}", path, lineno) from e
        if not isinstance(row, list) or len(row) != skel.n_joints:
            raise SequenceFormatError(
                f"frame {lineno - 2} has {len(row) if isinstance(row, list) else '?'} "
                f"joints, expected {skel.n_joints}",
                path,
                lineno,
            )
        frame = np.empty((skel.n_joints, 3))
        for j, trip in enumerate(row):
            if not isinstance(trip, list) or len(trip) != 3:
                raise SequenceFormatError(
                    f"frame {lineno - 2}, joint {j}: expected [x, y, z]", path, lineno
                )
            frame[j] = [math.nan if v is None else float(v) for v in trip]
        frames.append(frame)
    if len(frames) < 2:
        raise SequenceFormatError("T >= 2 required", path)
    positions = np.stack(frames)

    if skeleton is not None:
        order = []
        for name in skeleton.joint_names:
            if name not in skel.joint_names:
                raise SequenceFormatError(
                    f"file lacks joint '{name}' required by the target skeleton", path
                )
            order.append(skel.joint_names.index(name))
        positions = positions[:, order, :]
        skel = skeleton

    return JointSequence(fps, positions, skel, label=label, group_id=group_id)


def save_sequence(seq, path):
    """Serialize to the JSONL format; round-trips positions exactly."""
    skel = seq.skeleton
    header = {
        "format_version": FORMAT_VERSION,
        "fps": seq.fps,
        "units": "meters",
        "joints": list(skel.joint_names),
        "roles": {r: skel.joint_names[i] for r, i in skel.role_map.items()},
        "weights": {n: float(skel.joint_weights[i]) for i, n in enumerate(skel.joint_names)},
    }
    if seq.label is not None:
        header["label"] = seq.label
    if seq.group_id:
        header["group_id"] = seq.group_id
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for frame in seq.positions:
            row = [
                [None if math.isnan(v) else v for v in joint] for joint in frame.tolist()
            ]
            fh.write(json.dumps(row) + "\n")


def validate_and_repair(seq, max_gap=6):
    """Linearly interpolate NaN runs of length <= max_gap per joint coordinate.

    Longer runs, or NaNs touching the first/last frame of a joint track, are
    unrecoverable and raise GapError.  A sequence without NaNs is returned
    unchanged.
    """
    pos = seq.positions
    if np.all(np.isfinite(pos)):
        return seq
    if np.any(np.isinf(pos)):
        raise GapError("sequence contains infinite coordinates")
    repaired = pos.copy()
    T = seq.n_frames
    for j in range(seq.n_joints):
        bad = np.any(np.isnan(pos[:, j, :]), axis=1)
        if not bad.any():
            continue
        name = seq.skeleton.joint_names[j]
        if bad[0] or bad[-1]:
            raise GapError(
                f"joint '{name}' has missing data at a sequence boundary",
                joint=name,
            )
        # locate maximal NaN runs
        t = 0
        while t < T:
            if not bad[t]:
                t += 1
                continue
            start = t
            while t < T and bad[t]:
                t += 1
            run = t - start
            if run > max_gap:
                raise GapError(
                    f"joint '{name}' missing for frames {start}..{t - 1} "
                    f"({run} > max_gap={max_gap})",
                    joint=name,
                    frames=(start, t - 1),
                )
            lo, hi = start - 1, t
            for k in range(start, t):
                frac = (k - lo) / (hi - lo)
                repaired[k, j, :] = (1 - frac) * pos[lo, j, :] + frac * pos[hi, j, :]
    return replace(seq, positions=repaired)


def resample(seq, target_fps):
    """Linearly resample onto a uniform grid spanning the same duration.

    The new grid keeps the first and last frames; the sample count follows the
    fps ratio, so the declared fps is exact only when the duration divides
    evenly (identity resampling is always exact).
    """
    if target_fps <= 0:
        raise SequenceFormatError(f"target_fps must be > 0, got {target_fps}")
    seq.require_finite()
    T = seq.n_frames
    duration = (T - 1) / seq.fps
    new_T = max(2, int(round(T * target_fps / seq.fps)))
    old_t = np.arange(T) / seq.fps
    new_t = np.linspace(0.0, duration, new_T)
    flat = seq.positions.reshape(T, -1)
    out = np.empty((new_T, flat.shape[1]))
    for c in range(flat.shape[1]):
        out[:, c] = np.interp(new_t, old_t, flat[:, c])
    return replace(
        seq,
        fps=float(target_fps),
        positions=out.reshape(new_T, seq.n_joints, 3),
    )

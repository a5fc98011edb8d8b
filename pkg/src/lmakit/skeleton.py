"""Skeleton definition: joint naming, semantic roles and per-joint weights."""

from dataclasses import dataclass, field

import numpy as np

from .errors import SkeletonError

# Semantic roles every skeleton must resolve.  Feature code addresses joints
# exclusively through these names, never through storage indices.
REQUIRED_ROLES = (
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_hand",
    "right_hand",
    "torso",
    "pelvis",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
    "left_foot",
    "right_foot",
)

# Elbows are optional; when absent the elbow angle uses a midarm proxy vertex.
OPTIONAL_ROLES = ("left_elbow", "right_elbow")

# Default per-joint weights: extremities dominate, trunk joints contribute less.
DEFAULT_ROLE_WEIGHTS = {
    "left_hand": 1.0,
    "right_hand": 1.0,
    "left_foot": 1.0,
    "right_foot": 1.0,
    "left_ankle": 1.0,
    "right_ankle": 1.0,
    "head": 0.8,
    "pelvis": 0.5,
}
DEFAULT_OTHER_WEIGHT = 0.3


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint ordering, role mapping and weights for one skeleton convention.

    joint_names : ordered joint names, no duplicates.
    role_map    : semantic role -> joint index; must cover REQUIRED_ROLES with
                  pairwise-distinct indices.
    joint_weights : per-joint weight alpha_j >= 0, at least one positive.
    """

    joint_names: tuple
    role_map: dict
    joint_weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = tuple(self.joint_names)
        object.__setattr__(self, "joint_names", names)
        if len(set(names)) != len(names):
            raise SkeletonError("duplicate joint names in skeleton")
        n = len(names)
        seen = set()
        for role in REQUIRED_ROLES:
            if role not in self.role_map:
                raise SkeletonError(f"missing required role '{role}'")
        for role, idx in self.role_map.items():
            if role not in REQUIRED_ROLES and role not in OPTIONAL_ROLES:
                raise SkeletonError(f"unknown role '{role}'")
            if not 0 <= idx < n:
                raise SkeletonError(f"role '{role}' maps to invalid index {idx}")
            if idx in seen:
                raise SkeletonError(f"role '{role}' duplicates joint index {idx}")
            seen.add(idx)
        w = np.asarray(self.joint_weights, dtype=float)
        object.__setattr__(self, "joint_weights", w)
        if w.shape != (n,):
            raise SkeletonError("joint_weights length must match joint count")
        if np.any(w < 0) or not np.any(w > 0):
            raise SkeletonError("joint_weights must be >= 0 with at least one > 0")

    @property
    def n_joints(self):
        return len(self.joint_names)

    def index(self, role):
        """Joint index for a semantic role."""
        try:
            return self.role_map[role]
        except KeyError:
            raise SkeletonError(f"role '{role}' not resolvable in skeleton") from None

    def has_role(self, role):
        return role in self.role_map

    def weight(self, role):
        return float(self.joint_weights[self.index(role)])


def default_weight_for(role_or_name):
    return DEFAULT_ROLE_WEIGHTS.get(role_or_name, DEFAULT_OTHER_WEIGHT)


def canonical_skeleton():
    """The 13-joint skeleton whose joint names are the role names themselves."""
    names = REQUIRED_ROLES
    weights = np.array([default_weight_for(r) for r in names])
    return SkeletonSpec(
        joint_names=names,
        role_map={r: i for i, r in enumerate(names)},
        joint_weights=weights,
    )

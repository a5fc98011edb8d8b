"""The 55-slot movement descriptor computed over sliding windows.

Slots are grouped into the four classic movement-analysis families:

  Body (18)   : 8 inter-joint distances, 6 joint angles, 4 initiation rates
  Effort (16) : 6 path-directness ratios, kinetic-energy mean/max,
                acceleration mean/max, 6 jerk means
  Shape (4)   : convex-hull volume statistics
  Space (17)  : kinesphere dispersion, pelvis path/curvature, per-joint
                travel, pelvis height above the floor

The layout is a frozen schema: every CSV, model and attribution refers to
slots through FEATURE_NAMES.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import LmaError
from .floor import flat_floor, height_above_floor
from .hull import hull_volume
from .kinematics import WindowConfig, derivative, windows

EFFORT_ROLES = ("head", "left_hand", "right_hand", "left_foot", "right_foot")
DEFAULT_SELECTED = EFFORT_ROLES + ("pelvis",)

FEATURE_NAMES = (
    # Body: distances (m)
    "dist_hand_hand",
    "dist_lhand_pelvis",
    "dist_rhand_pelvis",
    "dist_ankle_ankle",
    "dist_knee_knee",
    "dist_lshoulder_lhand",
    "dist_rshoulder_rhand",
    "dist_head_pelvis",
    # Body: angles (rad)
    "angle_left_elbow",
    "angle_right_elbow",
    "angle_left_knee",
    "angle_right_knee",
    "angle_left_shoulder",
    "angle_right_shoulder",
    # Body: movement initiation rates
    "initiation_left_hand",
    "initiation_right_hand",
    "initiation_left_foot",
    "initiation_right_foot",
    # Effort: space (directness ratios)
    "effort_space_head",
    "effort_space_left_hand",
    "effort_space_right_hand",
    "effort_space_left_foot",
    "effort_space_right_foot",
    "effort_space_total",
    # Effort: weight (kinetic energy)
    "effort_weight_mean",
    "effort_weight_max",
    # Effort: time (acceleration)
    "effort_time_mean",
    "effort_time_max",
    # Effort: flow (jerk)
    "effort_flow_head",
    "effort_flow_left_hand",
    "effort_flow_right_hand",
    "effort_flow_left_foot",
    "effort_flow_right_foot",
    "effort_flow_total",
    # Shape: hull volume statistics (m^3)
    "volume_mean",
    "volume_std",
    "volume_min",
    "volume_max",
    # Space: kinesphere dispersion (m)
    "dispersion_upper_mean",
    "dispersion_upper_std",
    "dispersion_lower_mean",
    "dispersion_lower_std",
    # Space: pelvis trajectory
    "pelvis_path_length",
    "pelvis_net_displacement",
    "pelvis_path_ratio",
    "pelvis_curvature_mean",
    "pelvis_curvature_max",
    # Space: per-joint travel (m)
    "travel_head",
    "travel_left_hand",
    "travel_right_hand",
    "travel_left_foot",
    "travel_right_foot",
    # Space: pelvis height above floor (m)
    "pelvis_height_mean",
    "pelvis_height_min",
    "pelvis_height_max",
)

assert len(FEATURE_NAMES) == 55

UPPER_DISPERSION_ROLES = ("head", "left_hand", "right_hand", "left_shoulder", "right_shoulder")
LOWER_DISPERSION_ROLES = ("left_knee", "right_knee", "left_ankle", "right_ankle")

_CURVATURE_SPEED_FLOOR = 1e-9


@dataclass(frozen=True)
class LmaConfig:
    window: WindowConfig = field(default_factory=WindowConfig)
    initiation_scale: float = 1.0
    epsilon_net: float = 1e-3
    selected_joints: tuple = DEFAULT_SELECTED

    def __post_init__(self):
        if self.initiation_scale <= 0:
            raise LmaError("initiation_scale must be > 0")
        if self.epsilon_net <= 0:
            raise LmaError("epsilon_net must be > 0")
        if not self.selected_joints:
            raise LmaError("selected_joints must be non-empty")


@dataclass(frozen=True)
class WindowFeatures:
    values: np.ndarray
    window_start: int
    label: str | None = None
    group_id: str = ""

    layout = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (55,):
            raise LmaError(f"expected 55 feature values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise LmaError("non-finite feature value")

    def __getitem__(self, name):
        return float(self.values[FEATURE_NAMES.index(name)])


def _angle_at(a, b, c):
    """Angle (rad, in [0, pi]) at vertex b for frames of points a, b, c."""
    u = a - b
    v = c - b
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    denom = nu * nv
    cosang = np.zeros(denom.shape)
    ok = denom > 1e-12
    dots = np.sum(u * v, axis=-1)
    cosang[ok] = np.clip(dots[ok] / denom[ok], -1.0, 1.0)
    ang = np.arccos(cosang)
    ang[~ok] = 0.0
    return ang


class SequencePrimitives:
    """Per-frame quantities computed once per sequence and shared across
    window sizes (derivatives, distances, angles, hull volumes, ...)."""

    def __init__(self, seq):
        seq.require_finite()
        self.seq = seq
        skel = seq.skeleton
        pos = seq.positions
        dt = seq.dt
        self.dt = dt
        T = seq.n_frames

        self.vel = derivative(pos, 1, dt).values
        self.acc = derivative(pos, 2, dt).values
        self.jerk = derivative(pos, 3, dt).values if T >= 4 else np.zeros_like(pos)
        self.speed = np.linalg.norm(self.vel, axis=2)
        self.accel_mag = np.linalg.norm(self.acc, axis=2)
        self.jerk_mag = np.linalg.norm(self.jerk, axis=2)
        # frame-to-frame displacement lengths, per joint
        self.step_len = np.linalg.norm(pos[1:] - pos[:-1], axis=2)

        def track(role):
            return pos[:, skel.index(role), :]

        lh, rh = track("left_hand"), track("right_hand")
        la, ra = track("left_ankle"), track("right_ankle")
        lk, rk = track("left_knee"), track("right_knee")
        ls, rs = track("left_shoulder"), track("right_shoulder")
        head, pelvis, torso = track("head"), track("pelvis"), track("torso")

        def dist(a, b):
            return np.linalg.norm(a - b, axis=1)

        self.distances = np.column_stack(
            [
                dist(lh, rh),
                dist(lh, pelvis),
                dist(rh, pelvis),
                dist(la, ra),
                dist(lk, rk),
                dist(ls, lh),
                dist(rs, rh),
                dist(head, pelvis),
            ]
        )

        le = track("left_elbow") if skel.has_role("left_elbow") else 0.5 * (ls + lh)
        re = track("right_elbow") if skel.has_role("right_elbow") else 0.5 * (rs + rh)
        self.angles = np.column_stack(
            [
                _angle_at(ls, le, lh),
                _angle_at(rs, re, rh),
                _angle_at(pelvis, lk, la),
                _angle_at(pelvis, rk, ra),
                _angle_at(head, ls, lh),
                _angle_at(head, rs, rh),
            ]
        )

        upper = np.stack([dist(track(r), torso) for r in UPPER_DISPERSION_ROLES])
        lower = np.stack([dist(track(r), pelvis) for r in LOWER_DISPERSION_ROLES])
        self.dispersion_upper = upper.mean(axis=0)
        self.dispersion_lower = lower.mean(axis=0)

        self.volume = np.array([hull_volume(pos[t]) for t in range(T)])

        pv = self.vel[:, skel.index("pelvis"), :]
        pa = self.acc[:, skel.index("pelvis"), :]
        cross = np.cross(pv, pa)
        speed3 = np.maximum(np.linalg.norm(pv, axis=1) ** 3, _CURVATURE_SPEED_FLOOR)
        self.pelvis_curvature = np.linalg.norm(cross, axis=1) / speed3


def _initiation_predicates(seq, role, cfg):
    """Per-frame initiation predicate: windowed displacement rate above a
    threshold scaled from the whole-sequence speed deviation.

    The look-ahead is clamped at the final frame so trailing windows stay
    defined; the last frame itself carries no predicate.
    """
    pos = seq.joint(role)
    T = pos.shape[0]
    dt = seq.dt
    w = cfg.window.w
    step_speed = np.linalg.norm(pos[1:] - pos[:-1], axis=1) / dt
    tau = cfg.initiation_scale * float(np.std(step_speed))
    t = np.arange(T - 1)
    t2 = np.minimum(t + w, T - 1)
    disp = np.linalg.norm(pos[t2] - pos[t], axis=1)
    rate = disp / ((t2 - t) * dt)
    return rate > tau  # length T-1; frame T-1 has no look-ahead


def _effort_space_ratio(pos, start, end, w_inner, epsilon_net):
    """Path-to-net-displacement ratio over chords tiling the window."""
    k_max = (end - 1 - start) // w_inner
    if k_max < 1:
        raise LmaError(
            f"window of {end - start} frames too short for inner stride {w_inner}"
        )
    samples = pos[start : start + k_max * w_inner + 1 : w_inner]
    chords = float(np.sum(np.linalg.norm(np.diff(samples, axis=0), axis=1)))
    if chords < 1e-12:
        return 0.0
    net = float(np.linalg.norm(samples[-1] - samples[0]))
    return chords / max(net, epsilon_net)


def assemble_features(seq, plane=None, cfg=None, primitives=None):
    """One WindowFeatures per sliding window, in the frozen 55-slot layout."""
    cfg = cfg or LmaConfig()
    plane = plane or flat_floor()
    prim = primitives or SequencePrimitives(seq)
    skel = seq.skeleton
    w = cfg.window.w
    w_inner = max(2, w // 5)
    spans = windows(seq.n_frames, cfg.window)

    alphas = {r: skel.weight(r) for r in cfg.selected_joints}
    sel_idx = [skel.index(r) for r in cfg.selected_joints]
    sel_alpha = np.array([alphas[r] for r in cfg.selected_joints])

    init_roles = ("left_hand", "right_hand", "left_foot", "right_foot")
    init_pred = {r: _initiation_predicates(seq, r, cfg) for r in init_roles}

    # per-frame weighted aggregates over the selected joints
    energy = 0.5 * (sel_alpha[None, :] * prim.speed[:, sel_idx] ** 2).sum(axis=1)
    accel_sum = (sel_alpha[None, :] * prim.accel_mag[:, sel_idx]).sum(axis=1)

    pelvis_idx = skel.index("pelvis")
    heights = height_above_floor(seq.positions[:, pelvis_idx, :], plane)
    effort_tracks = {r: seq.positions[:, skel.index(r), :] for r in set(cfg.selected_joints) | set(EFFORT_ROLES)}
    travel_idx = [skel.index(r) for r in EFFORT_ROLES]

    out = []
    for s, e in spans:
        row = np.empty(55)
        i = 0
        row[i : i + 8] = prim.distances[s:e].mean(axis=0)
        i += 8
        row[i : i + 6] = prim.angles[s:e].mean(axis=0)
        i += 6
        for r in init_roles:
            pred = init_pred[r][s : min(e, seq.n_frames - 1)]
            row[i] = float(pred.mean()) if len(pred) else 0.0
            i += 1
        ratios = {
            r: _effort_space_ratio(effort_tracks[r], s, e, w_inner, cfg.epsilon_net)
            for r in effort_tracks
        }
        for r in EFFORT_ROLES:
            row[i] = ratios[r]
            i += 1
        row[i] = sum(alphas[r] * ratios[r] for r in cfg.selected_joints)
        i += 1
        row[i] = energy[s:e].mean()
        row[i + 1] = energy[s:e].max()
        i += 2
        row[i] = accel_sum[s:e].mean()
        row[i + 1] = accel_sum[s:e].max()
        i += 2
        for r in EFFORT_ROLES:
            row[i] = prim.jerk_mag[s:e, skel.index(r)].mean()
            i += 1
        row[i] = float(
            sum(alphas[r] * prim.jerk_mag[s:e, skel.index(r)].mean() for r in cfg.selected_joints)
        )
        i += 1
        vol = prim.volume[s:e]
        row[i : i + 4] = [vol.mean(), vol.std(), vol.min(), vol.max()]
        i += 4
        du = prim.dispersion_upper[s:e]
        dl = prim.dispersion_lower[s:e]
        row[i : i + 4] = [du.mean(), du.std(), dl.mean(), dl.std()]
        i += 4
        path = float(prim.step_len[s : e - 1, pelvis_idx].sum())
        net = float(np.linalg.norm(seq.positions[e - 1, pelvis_idx] - seq.positions[s, pelvis_idx]))
        ratio = 0.0 if path < 1e-12 else path / max(net, cfg.epsilon_net)
        row[i : i + 3] = [path, net, ratio]
        i += 3
        curv = prim.pelvis_curvature[s:e]
        row[i : i + 2] = [curv.mean(), curv.max()]
        i += 2
        row[i : i + 5] = prim.step_len[s : e - 1, travel_idx].sum(axis=0)
        i += 5
        h = heights[s:e]
        row[i : i + 3] = [h.mean(), h.min(), h.max()]
        i += 3
        assert i == 55
        out.append(
            WindowFeatures(values=row, window_start=s, label=seq.label, group_id=seq.group_id)
        )
    return out


CSV_EXTRA_COLUMNS = ("label", "group_id", "window_start")


def write_features_csv(feature_rows, path):
    """Feature CSV: the 55 canonical names + label/group_id/window_start."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(FEATURE_NAMES) + list(CSV_EXTRA_COLUMNS))
        for wf in feature_rows:
            writer.writerow(
                [f"{v:.9g}" for v in wf.values]
                + [wf.label or "", wf.group_id, wf.window_start]
            )


def read_features_csv(path):
    """Load a feature CSV back into (X, labels, groups, window_starts)."""
    import csv

    from .errors import SchemaError

    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = list(FEATURE_NAMES) + list(CSV_EXTRA_COLUMNS)
        if header != expected:
            raise SchemaError(f"feature CSV header does not match the canonical layout: {path}")
        X, labels, groups, starts = [], [], [], []
        for row in reader:
            if not row:
                continue
            if len(row) != 58:
                raise SchemaError(f"feature CSV row has {len(row)} columns, expected 58")
            X.append([float(v) for v in row[:55]])
            labels.append(row[55] or None)
            groups.append(row[56])
            starts.append(int(row[57]))
    return np.array(X), labels, groups, starts

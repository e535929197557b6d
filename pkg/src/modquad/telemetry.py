"""Telemetry CSV persistence and tracking metrics.

One row per control tick. The attitude is stored as a unit quaternion
(w, x, y, z) of the structure attitude for compactness; `sat` counts the
rotors whose command hit a motor limit that tick. Floats are written with
repr precision so identical runs produce byte-identical files.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import MalformedTelemetry
from .geometry import vee

_FIXED_FIELDS = ["t", "rx", "ry", "rz", "vx", "vy", "vz",
                 "qw", "qx", "qy", "qz", "wx", "wy", "wz",
                 "rdx", "rdy", "rdz", "yaw_d", "pitch_d"]


def rotation_to_quaternion(r):
    """Unit quaternion (w, x, y, z) of a rotation matrix.

    The sign is normalized (first non-zero component positive) so the
    serialization is deterministic.
    """
    r = np.asarray(r, dtype=float)
    trace = np.trace(r)
    if trace > 0.0:
        s = math.sqrt(trace + 1.0) * 2.0
        q = np.array([0.25 * s, (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s, 0.25 * s,
                      (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s,
                      0.25 * s, (r[1, 2] + r[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s,
                      (r[1, 2] + r[2, 1]) / s, 0.25 * s])
    q /= np.linalg.norm(q)
    for component in q:
        if component != 0.0:
            if component < 0.0:
                q = -q
            break
    return q


def quaternion_to_rotation(q):
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def csv_header(n_rotors):
    return _FIXED_FIELDS + [f"u{i + 1}" for i in range(n_rotors)] + ["sat"]


def write_csv(telemetry, path):
    """Write one CSV row per control tick of a telemetry log."""
    n = telemetry.n_rotors
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(csv_header(n))
        for i in range(len(telemetry)):
            state_q = rotation_to_quaternion(telemetry._rows["attitude"][i])
            row = [telemetry._rows["t"][i]]
            row.extend(telemetry._rows["position"][i])
            row.extend(telemetry._rows["velocity"][i])
            row.extend(state_q)
            row.extend(telemetry._rows["angular_velocity"][i])
            row.extend(telemetry._rows["position_d"][i])
            row.append(telemetry._rows["yaw_d"][i])
            row.append(telemetry._rows["pitch_d"][i])
            row.extend(telemetry._rows["u_actual"][i])
            row.append(int(np.sum(telemetry._rows["saturated"][i])))
            writer.writerow([repr(float(value)) if not isinstance(value, int)
                             else str(value) for value in row])


@dataclass
class TelemetryTable:
    """Columns of a telemetry CSV as arrays."""

    t: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    quaternion: np.ndarray
    angular_velocity: np.ndarray
    position_d: np.ndarray
    yaw_d: np.ndarray
    pitch_d: np.ndarray
    thrusts: np.ndarray
    saturated_count: np.ndarray

    @property
    def n_rotors(self):
        return self.thrusts.shape[1]


def read_csv(path):
    """Load a telemetry CSV; raises MalformedTelemetry on schema problems."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedTelemetry("file is empty") from None
        rows = list(reader)
    if header[:len(_FIXED_FIELDS)] != _FIXED_FIELDS or header[-1] != "sat":
        raise MalformedTelemetry("unexpected column layout")
    n_rotors = len(header) - len(_FIXED_FIELDS) - 1
    if n_rotors < 1 or n_rotors % 4 != 0:
        raise MalformedTelemetry(f"implausible rotor column count {n_rotors}")
    if not rows:
        raise MalformedTelemetry("file has a header but no rows")
    try:
        data = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise MalformedTelemetry(f"unparseable row: {exc}") from exc
    if data.shape[1] != len(header):
        raise MalformedTelemetry("row width does not match header")
    return TelemetryTable(
        t=data[:, 0],
        position=data[:, 1:4],
        velocity=data[:, 4:7],
        quaternion=data[:, 7:11],
        angular_velocity=data[:, 11:14],
        position_d=data[:, 14:17],
        yaw_d=data[:, 17],
        pitch_d=data[:, 18],
        thrusts=data[:, 19:19 + n_rotors],
        saturated_count=data[:, -1],
    )


@dataclass
class MetricsReport:
    """Per-axis tracking errors over the post-transient window."""

    max_position_error: np.ndarray
    rms_position_error: np.ndarray
    max_attitude_error_deg: np.ndarray
    rms_attitude_error_deg: np.ndarray
    saturation_fraction: float
    diverged: bool
    window_start: float
    samples: int


def _attitude_errors_deg(table, frame_rotation):
    """Per-axis angle (deg) between the desired and flown thrust frame."""
    errors = np.empty((len(table.t), 3))
    cos_p = np.cos(table.pitch_d)
    sin_p = np.sin(table.pitch_d)
    cos_y = np.cos(table.yaw_d)
    sin_y = np.sin(table.yaw_d)
    for i in range(len(table.t)):
        attitude = quaternion_to_rotation(table.quaternion[i])
        flown = attitude @ frame_rotation
        desired = np.array([
            [cos_y[i] * cos_p[i], -sin_y[i], cos_y[i] * sin_p[i]],
            [sin_y[i] * cos_p[i], cos_y[i], sin_y[i] * sin_p[i]],
            [-sin_p[i], 0.0, cos_p[i]],
        ])
        e = vee(0.5 * (desired.T @ flown - flown.T @ desired))
        errors[i] = np.degrees(np.arcsin(np.clip(e, -1.0, 1.0)))
    return errors


def compute_metrics(table, skip_s=5.0, frame_rotation=None):
    """Tracking metrics over rows with t >= skip_s (all rows if that
    window is empty). `frame_rotation` is the structure-to-thrust-frame
    rotation; identity when omitted."""
    frame_rotation = np.eye(3) if frame_rotation is None else frame_rotation
    diverged = not np.all(np.isfinite(table.position))
    mask = table.t >= skip_s
    if not np.any(mask):
        mask = np.ones(len(table.t), dtype=bool)
    window = TelemetryTable(
        t=table.t[mask], position=table.position[mask],
        velocity=table.velocity[mask], quaternion=table.quaternion[mask],
        angular_velocity=table.angular_velocity[mask],
        position_d=table.position_d[mask], yaw_d=table.yaw_d[mask],
        pitch_d=table.pitch_d[mask], thrusts=table.thrusts[mask],
        saturated_count=table.saturated_count[mask],
    )
    pos_error = window.position - window.position_d
    att_error = _attitude_errors_deg(window, frame_rotation)
    return MetricsReport(
        max_position_error=np.max(np.abs(pos_error), axis=0),
        rms_position_error=np.sqrt(np.mean(pos_error**2, axis=0)),
        max_attitude_error_deg=np.max(np.abs(att_error), axis=0),
        rms_attitude_error_deg=np.sqrt(np.mean(att_error**2, axis=0)),
        saturation_fraction=float(
            np.mean(window.saturated_count / window.n_rotors)
        ),
        diverged=diverged,
        window_start=float(skip_s),
        samples=int(len(window.t)),
    )

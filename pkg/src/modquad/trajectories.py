"""Reference-trajectory generators: helix, rectangle, attitude sine,
hover, and chained quintic segments with analytic derivatives.

Every generator is a pure function of time returning a Setpoint whose
velocity and acceleration are exact derivatives of the position, and
whose mode matches the structure's controllable DOF.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .control import Setpoint
from .errors import InvalidParams, OutOfRange, SingularSystem

TWO_PI = 2.0 * np.pi


def _wrap_angle(a):
    return (a + np.pi) % TWO_PI - np.pi


def _attitude_setpoint(mode, yaw, pitch):
    """Yaw/pitch targets in the representation the controller mode expects."""
    if mode == "dof4":
        if abs(pitch) > 1e-12:
            raise InvalidParams("4-DOF structures cannot hold a pitch target")
        return {"yaw": yaw}
    if mode == "dof5":
        return {"yaw": yaw, "pitch": pitch}
    attitude = geometry.rot_principal("z", yaw) @ geometry.rot_principal("y", pitch)
    return {"yaw": yaw, "pitch": pitch, "attitude": attitude}


# ---------------------------------------------------------------------------
# trajectory definitions (parsed from scenario configs)


@dataclass(frozen=True)
class HelixDef:
    center: tuple = (-0.5, 0.0)
    radius: float = 0.45
    z_min: float = 0.45
    z_max: float = 0.95
    z_period: float = 14.0
    xy_period: float = 14.0
    yaw_period: float = 18.0

    kind = "helix"

    def __post_init__(self):
        if min(self.z_period, self.xy_period, self.yaw_period) <= 0.0:
            raise InvalidParams("helix periods must be positive")


@dataclass(frozen=True)
class RectangleDef:
    length: float = 0.8
    width: float = 0.6
    height: float = 0.5
    lap_time: float = 24.0
    pitch_hold: float = 0.0
    yaw_hold: float = 0.0

    kind = "rectangle"

    def __post_init__(self):
        if self.lap_time <= 0.0:
            raise InvalidParams("lap_time must be positive")


@dataclass(frozen=True)
class AttitudeSineDef:
    axis: str = "y"
    amplitude: float = np.radians(20.0)
    period: float = 90.0
    hover_point: tuple = (0.0, 0.0, 0.5)

    kind = "attitude_sine"

    def __post_init__(self):
        if self.period <= 0.0:
            raise InvalidParams("period must be positive")
        if self.axis not in ("x", "y", "z"):
            raise InvalidParams(f"axis must be x, y or z, got {self.axis!r}")


@dataclass(frozen=True)
class Waypoint:
    position: tuple
    rotation: tuple = (0.0, 0.0, 0.0)  # axis-angle vector w.r.t. the start


@dataclass(frozen=True)
class QuinticChainDef:
    waypoints: tuple
    durations: tuple

    kind = "quintic_chain"

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise InvalidParams("quintic chain needs at least two waypoints")
        if len(self.durations) != len(self.waypoints) - 1:
            raise InvalidParams("need one duration per segment")
        if any(d <= 0.0 for d in self.durations):
            raise InvalidParams("segment durations must be positive")


@dataclass(frozen=True)
class HoverDef:
    point: tuple = (0.0, 0.0, 0.5)
    yaw: float = 0.0
    pitch: float = 0.0

    kind = "hover"


# ---------------------------------------------------------------------------
# generators


def helix(t, defn=HelixDef(), dof=4):
    """Circle in xy, cosine z oscillation, linearly wrapping yaw.

    Phase convention: t = 0 sits at the +x side of the circle with z at
    the bottom of its range.
    """
    w_xy = TWO_PI / defn.xy_period
    w_z = TWO_PI / defn.z_period
    amp = 0.5 * (defn.z_max - defn.z_min)
    cx, cy = defn.center
    pos = np.array([
        cx + defn.radius * np.cos(w_xy * t),
        cy + defn.radius * np.sin(w_xy * t),
        defn.z_min + amp * (1.0 - np.cos(w_z * t)),
    ])
    vel = np.array([
        -defn.radius * w_xy * np.sin(w_xy * t),
        defn.radius * w_xy * np.cos(w_xy * t),
        amp * w_z * np.sin(w_z * t),
    ])
    acc = np.array([
        -defn.radius * w_xy**2 * np.cos(w_xy * t),
        -defn.radius * w_xy**2 * np.sin(w_xy * t),
        amp * w_z**2 * np.cos(w_z * t),
    ])
    yaw_rate = TWO_PI / defn.yaw_period
    yaw = _wrap_angle(yaw_rate * t)
    extras = _attitude_setpoint(f"dof{dof}", yaw, 0.0)
    return Setpoint(pos, vel, acc, f"dof{dof}",
                    angular_velocity=[0.0, 0.0, yaw_rate], **extras)


def rectangle(t, defn=RectangleDef(), dof=5):
    """Rectangle perimeter at constant height with held yaw/pitch targets.

    Each edge is a rest-to-rest quintic taking a quarter of the lap, so
    the lap is periodic and corner velocities vanish.
    """
    half_l, half_w = defn.length / 2.0, defn.width / 2.0
    corners = np.array([
        [-half_l, -half_w], [half_l, -half_w],
        [half_l, half_w], [-half_l, half_w],
    ])
    edge_time = defn.lap_time / 4.0
    s = np.fmod(t, defn.lap_time)
    edge = min(int(s // edge_time), 3)
    tau = s - edge * edge_time
    start, end = corners[edge], corners[(edge + 1) % 4]
    shape, dshape, ddshape = _rest_to_rest(tau, edge_time)
    xy = start + shape * (end - start)
    dxy = dshape * (end - start)
    ddxy = ddshape * (end - start)
    pos = np.array([xy[0], xy[1], defn.height])
    vel = np.array([dxy[0], dxy[1], 0.0])
    acc = np.array([ddxy[0], ddxy[1], 0.0])
    extras = _attitude_setpoint(f"dof{dof}", defn.yaw_hold, defn.pitch_hold)
    return Setpoint(pos, vel, acc, f"dof{dof}", **extras)


def _rest_to_rest(t, duration):
    """Normalized rest-to-rest quintic shape and its two time derivatives."""
    tau = np.clip(t / duration, 0.0, 1.0)
    s = 10 * tau**3 - 15 * tau**4 + 6 * tau**5
    ds = (30 * tau**2 - 60 * tau**3 + 30 * tau**4) / duration
    dds = (60 * tau - 180 * tau**2 + 120 * tau**3) / duration**2
    return s, ds, dds


def attitude_sine(t, defn=AttitudeSineDef()):
    """Hover in place while one attitude angle follows a sine."""
    rate = TWO_PI / defn.period
    angle = defn.amplitude * np.sin(rate * t)
    angle_rate = defn.amplitude * rate * np.cos(rate * t)
    attitude = geometry.rot_principal(defn.axis, angle)
    axis_index = "xyz".index(defn.axis)
    omega = np.zeros(3)
    omega[axis_index] = angle_rate
    yaw = angle if defn.axis == "z" else 0.0
    pitch = angle if defn.axis == "y" else 0.0
    return Setpoint(np.asarray(defn.hover_point, dtype=float), np.zeros(3),
                    np.zeros(3), "dof6", yaw=yaw, pitch=pitch,
                    attitude=attitude, angular_velocity=omega)


def hover(t, defn=HoverDef(), dof=6):
    extras = _attitude_setpoint(f"dof{dof}", defn.yaw, defn.pitch)
    return Setpoint(np.asarray(defn.point, dtype=float), np.zeros(3),
                    np.zeros(3), f"dof{dof}", **extras)


# ---------------------------------------------------------------------------
# quintic segments


def quintic_segment(start, end, duration):
    """Coefficients (ascending powers) of the degree-5 polynomial matching
    position/velocity/acceleration at both ends of one axis."""
    if duration <= 0.0:
        raise SingularSystem("segment duration must be positive")
    p0, v0, a0 = start
    p1, v1, a1 = end
    rows = []
    rhs = [p0, v0, a0, p1, v1, a1]
    rows.append([1, 0, 0, 0, 0, 0])
    rows.append([0, 1, 0, 0, 0, 0])
    rows.append([0, 0, 2, 0, 0, 0])
    powers = duration ** np.arange(6)
    rows.append(powers)
    rows.append([i * duration ** max(i - 1, 0) for i in range(6)])
    rows.append([i * (i - 1) * duration ** max(i - 2, 0) for i in range(6)])
    try:
        return np.linalg.solve(np.array(rows, dtype=float), np.array(rhs, dtype=float))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by duration > 0
        raise SingularSystem(str(exc)) from exc


def quintic_eval(coeffs, t, duration=None):
    """Position, velocity, and acceleration of a quintic at time t.

    `coeffs` holds ascending powers, one row per axis (or a single row).
    Raises OutOfRange when a duration is given and t falls outside it.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if duration is not None and not (0.0 <= t <= duration):
        raise OutOfRange(f"t = {t} outside [0, {duration}]")
    powers = t ** np.arange(6)
    dpowers = np.array([0, 1, 2 * t, 3 * t**2, 4 * t**3, 5 * t**4])
    ddpowers = np.array([0, 0, 2, 6 * t, 12 * t**2, 20 * t**3])
    pos = coeffs @ powers
    vel = coeffs @ dpowers
    acc = coeffs @ ddpowers
    if pos.shape == (1,):
        return float(pos[0]), float(vel[0]), float(acc[0])
    return pos, vel, acc


def _so3_right_jacobian(phi):
    """Maps the derivative of an axis-angle vector to the body rate."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    p = geometry.hat(phi)
    if angle < 1e-8:
        return np.eye(3) - 0.5 * p
    return (
        np.eye(3)
        - ((1.0 - np.cos(angle)) / angle**2) * p
        + ((angle - np.sin(angle)) / angle**3) * (p @ p)
    )


class QuinticChain:
    """Rest-to-rest quintic segments through position/attitude waypoints.

    Attitude interpolates the axis-angle vector of the desired attitude
    relative to the start; adequate for the small excursions flown here.
    Produces 6-DOF setpoints.
    """

    def __init__(self, defn):
        self.defn = defn
        self.starts = np.concatenate([[0.0], np.cumsum(defn.durations)])
        self.segments = []
        for i in range(len(defn.durations)):
            a = defn.waypoints[i]
            b = defn.waypoints[i + 1]
            duration = defn.durations[i]
            channels = []
            for axis in range(3):
                channels.append(quintic_segment(
                    (a.position[axis], 0.0, 0.0), (b.position[axis], 0.0, 0.0),
                    duration))
            for axis in range(3):
                channels.append(quintic_segment(
                    (a.rotation[axis], 0.0, 0.0), (b.rotation[axis], 0.0, 0.0),
                    duration))
            self.segments.append(np.array(channels))

    @property
    def total_time(self):
        return float(self.starts[-1])

    def __call__(self, t):
        t = min(max(t, 0.0), self.total_time)
        index = min(np.searchsorted(self.starts, t, side="right") - 1,
                    len(self.segments) - 1)
        tau = t - self.starts[index]
        values, dvalues, ddvalues = quintic_eval(self.segments[index], tau)
        rotvec = values[3:]
        attitude = geometry.so3_exp(rotvec, 1.0)
        omega = _so3_right_jacobian(rotvec) @ dvalues[3:]
        yaw = float(np.arctan2(attitude[1, 0], attitude[0, 0]))
        pitch = float(np.arcsin(np.clip(-attitude[2, 0], -1.0, 1.0)))
        return Setpoint(values[:3], dvalues[:3], ddvalues[:3], "dof6",
                        yaw=yaw, pitch=pitch, attitude=attitude,
                        angular_velocity=omega)


# ---------------------------------------------------------------------------
# dispatch


def make_trajectory(defn, dof):
    """Callable t -> Setpoint for a trajectory definition, in the setpoint
    mode matching the structure's controllable DOF."""
    if defn.kind == "helix":
        return lambda t: helix(t, defn, dof)
    if defn.kind == "rectangle":
        return lambda t: rectangle(t, defn, dof)
    if defn.kind == "attitude_sine":
        if dof != 6:
            raise InvalidParams("attitude_sine requires a 6-DOF structure")
        return lambda t: attitude_sine(t, defn)
    if defn.kind == "quintic_chain":
        if dof != 6:
            raise InvalidParams("quintic_chain requires a 6-DOF structure")
        return QuinticChain(defn)
    if defn.kind == "hover":
        return lambda t: hover(t, defn, dof)
    raise InvalidParams(f"unknown trajectory kind {defn.kind!r}")

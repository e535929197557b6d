"""Closed-loop rigid-body simulator with a fixed-step RK4 integrator.

Translation and body rates integrate with classic RK4; the attitude
advances multiplicatively on the rotation group using the midpoint body
rate, and is re-orthonormalized whenever floating-point drift exceeds
1e-9. Motors clamp to [0, f_max] (optionally with a deadzone and a
first-order lag) and hold their thrust between control ticks.

State feedback is perfect: no sensors, no estimator, no noise.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .control import Controller
from .errors import InapplicableDesign, InvalidParams, NonFiniteState

GRAVITY = 9.81

DEFAULT_DT_SIM = 0.001
DEFAULT_DT_CTRL = 0.002

_DIVERGENCE_RADIUS = 100.0
_ORTHO_DRIFT_TOL = 1e-9


@dataclass
class VehicleState:
    """World position/velocity, attitude, and body angular velocity."""

    position: np.ndarray
    velocity: np.ndarray
    attitude: np.ndarray
    angular_velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.attitude = np.asarray(self.attitude, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)

    def copy(self):
        return VehicleState(
            self.position.copy(),
            self.velocity.copy(),
            self.attitude.copy(),
            self.angular_velocity.copy(),
        )

    @property
    def finite(self):
        return (
            np.all(np.isfinite(self.position))
            and np.all(np.isfinite(self.velocity))
            and np.all(np.isfinite(self.attitude))
            and np.all(np.isfinite(self.angular_velocity))
        )


@dataclass
class MotorModel:
    """Per-rotor thrust limits; lag and deadzone are off by default."""

    f_max: float = 0.645
    time_constant: float = None
    deadzone: float = None

    def __post_init__(self):
        if self.f_max <= 0.0:
            raise InvalidParams("f_max must be positive")


def motor_apply(commands, model, dt, previous=None):
    """Thrusts the motors actually produce for the commanded ones.

    Commands clamp to [0, f_max]; below-deadzone commands produce zero;
    with a time constant the thrust relaxes exponentially from `previous`
    toward the clamped command. Returns (thrusts, saturated_mask) where
    the mask flags every rotor whose command was cut by the limits.
    """
    if dt <= 0.0:
        raise InvalidParams("dt must be positive")
    commands = np.asarray(commands, dtype=float)
    clamped = np.clip(commands, 0.0, model.f_max)
    saturated = (commands < 0.0) | (commands > model.f_max)
    if model.deadzone is not None:
        dead = clamped < model.deadzone
        clamped = np.where(dead, 0.0, clamped)
        saturated = saturated | (dead & (commands != 0.0))
    if model.time_constant is not None and previous is not None:
        alpha = 1.0 - np.exp(-dt / model.time_constant)
        actual = previous + alpha * (clamped - previous)
    else:
        actual = clamped
    return actual, saturated


def dynamics_derivative(state, thrusts, structure, gravity=GRAVITY):
    """Linear and angular acceleration for the applied rotor thrusts."""
    w = structure.design_matrix @ np.asarray(thrusts, dtype=float)
    accel = state.attitude @ w[:3] / structure.mass - gravity * geometry.E3
    omega = state.angular_velocity
    ang_accel = structure.inertia_inverse @ (
        w[3:] - geometry.cross3(omega, structure.inertia @ omega)
    )
    return accel, ang_accel


def step(state, thrusts, structure, dt, gravity=GRAVITY):
    """One RK4 step with held thrusts.

    The attitude used inside the stages advances by first-order rotation
    from the start-of-step rates; the final attitude applies the midpoint
    body rate over the full step.
    """
    inertia = structure.inertia
    inertia_inv = structure.inertia_inverse
    wrench_body = structure.design_matrix @ np.asarray(thrusts, dtype=float)
    force_body, torque_body = wrench_body[:3], wrench_body[3:]
    mass = structure.mass
    r0 = state.attitude

    def derivs(vel, omega, att):
        accel = att @ force_body / mass - gravity * geometry.E3
        ang = inertia_inv @ (torque_body - geometry.cross3(omega, inertia @ omega))
        return vel, accel, ang

    v0, w0 = state.velocity, state.angular_velocity
    r_half = r0 @ geometry.so3_exp(w0, dt / 2.0)
    r_full = r0 @ geometry.so3_exp(w0, dt)

    k1 = derivs(v0, w0, r0)
    k2 = derivs(v0 + dt / 2 * k1[1], w0 + dt / 2 * k1[2], r_half)
    k3 = derivs(v0 + dt / 2 * k2[1], w0 + dt / 2 * k2[2], r_half)
    k4 = derivs(v0 + dt * k3[1], w0 + dt * k3[2], r_full)

    def combine(i):
        return (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6.0

    position = state.position + dt * combine(0)
    velocity = v0 + dt * combine(1)
    omega = w0 + dt * combine(2)
    omega_mid = 0.5 * (w0 + omega)
    attitude = r0 @ geometry.so3_exp(omega_mid, dt)
    if geometry.orthonormality_drift(attitude) > _ORTHO_DRIFT_TOL:
        attitude = geometry.orthonormalize(attitude)
    return VehicleState(position, velocity, attitude, omega)


class Telemetry:
    """Per-control-tick log of a closed-loop run (uniform time step)."""

    def __init__(self, n_rotors):
        self.n_rotors = n_rotors
        self.diverged = False
        self._rows = {key: [] for key in (
            "t", "position", "velocity", "attitude", "angular_velocity",
            "position_d", "yaw_d", "pitch_d", "u_commanded", "u_actual",
            "saturated",
        )}

    def append(self, t, state, setpoint, u_cmd, u_actual, saturated):
        rows = self._rows
        rows["t"].append(t)
        rows["position"].append(state.position.copy())
        rows["velocity"].append(state.velocity.copy())
        rows["attitude"].append(state.attitude.copy())
        rows["angular_velocity"].append(state.angular_velocity.copy())
        rows["position_d"].append(np.asarray(setpoint.position, dtype=float).copy())
        yaw, pitch = _setpoint_yaw_pitch(setpoint)
        rows["yaw_d"].append(yaw)
        rows["pitch_d"].append(pitch)
        rows["u_commanded"].append(np.asarray(u_cmd, dtype=float).copy())
        rows["u_actual"].append(np.asarray(u_actual, dtype=float).copy())
        rows["saturated"].append(np.asarray(saturated, dtype=bool).copy())

    def __len__(self):
        return len(self._rows["t"])

    def __getattr__(self, name):
        rows = self.__dict__.get("_rows")
        if rows is not None and name in rows:
            return np.array(rows[name])
        raise AttributeError(name)


def _setpoint_yaw_pitch(setpoint):
    """Yaw/pitch targets of a setpoint (extracted from the attitude for dof6)."""
    if setpoint.mode == "dof6":
        r = setpoint.attitude
        yaw = float(np.arctan2(r[1, 0], r[0, 0]))
        pitch = float(np.arcsin(np.clip(-r[2, 0], -1.0, 1.0)))
        return yaw, pitch
    return float(setpoint.yaw), float(setpoint.pitch)


def initial_state_on_trajectory(trajectory, analysis):
    """State that starts exactly on the reference at t = 0."""
    sp = trajectory(0.0)
    ctl_attitude = _desired_attitude_at(sp, analysis)
    attitude = ctl_attitude @ analysis.f_frame.T
    return VehicleState(
        sp.position.copy(), sp.velocity.copy(), attitude,
        np.asarray(sp.angular_velocity, dtype=float).copy(),
    )


def _desired_attitude_at(setpoint, analysis):
    from . import control as _control

    if setpoint.mode == "dof4":
        accel = GRAVITY * geometry.E3 + setpoint.acceleration
        return _control.desired_attitude_4dof(accel, setpoint.yaw)
    if setpoint.mode == "dof5":
        accel = GRAVITY * geometry.E3 + setpoint.acceleration
        return _control.desired_attitude_5dof(accel, setpoint.yaw, setpoint.pitch)
    return np.asarray(setpoint.attitude, dtype=float)


def run_scenario(structure, analysis, gains, trajectory, duration,
                 dt_ctrl=DEFAULT_DT_CTRL, dt_sim=DEFAULT_DT_SIM,
                 motor=None, gravity=GRAVITY, initial_state=None):
    """Simulate the closed loop and log one telemetry row per control tick.

    The controller runs every dt_ctrl (an integer multiple of dt_sim);
    motor thrusts are zero-order-held over the sim sub-steps. Raises
    NonFiniteState (with the partial telemetry attached) when the state
    leaves a 100 m radius or stops being finite.
    """
    if analysis.applicable is False:
        raise InapplicableDesign("structure cannot hover along its thrust axis")
    if not 0.0 < dt_sim <= 0.01:
        raise InvalidParams("dt_sim must lie in (0, 0.01] s")
    substeps = int(round(dt_ctrl / dt_sim))
    if substeps < 1 or abs(dt_ctrl - substeps * dt_sim) > 1e-12:
        raise InvalidParams("dt_ctrl must be an integer multiple of dt_sim")
    if duration < 0.0:
        raise InvalidParams("duration must be non-negative")
    motor = motor if motor is not None else MotorModel()

    controller = Controller(structure, analysis, gains)
    state = (initial_state.copy() if initial_state is not None
             else initial_state_on_trajectory(trajectory, analysis))
    telemetry = Telemetry(structure.n_rotors)

    n_ticks = int(round(duration / dt_ctrl))
    previous = None
    for tick in range(n_ticks + 1):
        t = tick * dt_ctrl
        sp = trajectory(t)
        u_cmd = controller.step(state, sp, dt=dt_ctrl)
        u_actual, saturated = motor_apply(u_cmd, motor, dt_ctrl, previous)
        previous = u_actual
        telemetry.append(t, state, sp, u_cmd, u_actual, saturated)
        if tick == n_ticks:
            break
        for _ in range(substeps):
            state = step(state, u_actual, structure, dt_sim, gravity)
        if not state.finite or np.linalg.norm(state.position) > _DIVERGENCE_RADIUS:
            telemetry.diverged = True
            raise NonFiniteState(
                f"state diverged at t = {t + dt_ctrl:.3f} s", telemetry
            )
    return telemetry

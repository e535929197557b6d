"""Rotation-matrix utilities shared by every other module.

All rotations are plain 3x3 numpy arrays. Helpers here are pure functions
and never mutate their inputs.
"""

import numpy as np

from .errors import NonUnitAxis, NotSkewSymmetric

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

_SKEW_TOL = 1e-9
_UNIT_TOL = 1e-9
_EXP_ANGLE_FLOOR = 1e-12


def hat(v):
    """Skew-symmetric matrix S such that S @ w == np.cross(v, w)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def cross3(a, b):
    """Cross product of two 3-vectors (np.cross has high overhead here)."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def vee(s):
    """Inverse of hat(); raises NotSkewSymmetric beyond a 1e-9 residual."""
    s = np.asarray(s, dtype=float)
    if np.linalg.norm(s + s.T) >= _SKEW_TOL:
        raise NotSkewSymmetric(f"residual {np.linalg.norm(s + s.T):.3e}")
    return 0.5 * np.array([
        s[2, 1] - s[1, 2],
        s[0, 2] - s[2, 0],
        s[1, 0] - s[0, 1],
    ])


def rodrigues(axis, angle):
    """Rotation by `angle` about the unit vector `axis`.

    R = I + sin(angle) P + (1 - cos(angle)) P^2 with P = hat(axis).
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > _UNIT_TOL:
        raise NonUnitAxis(f"|axis| = {np.linalg.norm(axis):.12f}")
    p = hat(axis)
    return np.eye(3) + np.sin(angle) * p + (1.0 - np.cos(angle)) * (p @ p)


def rot_principal(axis_id, angle):
    """Principal rotation about the x-, y-, or z-axis."""
    c, s = np.cos(angle), np.sin(angle)
    if axis_id == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis_id == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis_id == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis_id must be 'x', 'y' or 'z', got {axis_id!r}")


def so3_exp(omega, dt):
    """Rotation reached after spinning at body rate `omega` for `dt` seconds.

    Returns the identity below an angle of 1e-12 rad, which avoids the
    division by zero with error far under machine precision.
    """
    omega = np.asarray(omega, dtype=float)
    speed = np.linalg.norm(omega)
    angle = speed * dt
    if abs(angle) < _EXP_ANGLE_FLOOR:
        return np.eye(3)
    return rodrigues(omega / speed, angle)


def orthonormality_drift(r):
    """Frobenius distance of R^T R from the identity."""
    r = np.asarray(r, dtype=float)
    return np.linalg.norm(r.T @ r - np.eye(3))


def orthonormalize(r):
    """Nearest rotation matrix in the Frobenius sense (polar projection)."""
    u, _, vt = np.linalg.svd(np.asarray(r, dtype=float))
    out = u @ vt
    if np.linalg.det(out) < 0.0:
        u = u.copy()
        u[:, -1] = -u[:, -1]
        out = u @ vt
    return out


def is_rotation(r, tol=1e-9):
    """True when R is orthonormal with determinant +1 within `tol`."""
    r = np.asarray(r, dtype=float)
    return orthonormality_drift(r) < tol and abs(np.linalg.det(r) - 1.0) < tol

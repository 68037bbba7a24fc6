"""Tendon force and joint torque model of a single finger.

The band leaves each joint at half the joint deflection, pulls on the distal
link with the full tendon tension and presses on every intermediate link
with a normal force of magnitude ``f_in * sin(delta)``.  Joint equilibrium
balances the resulting load torques against linear torsional springs.

Torques are signed z-scalars, flexion positive.  Band angles are taken from
the deflection relative to the printed rest shape, so a finger printed with
an initial bend carries no band normal forces at rest.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .geometry import FingerGeometry, deflections, forward_kinematics, joint_angles, lever_vectors


def _check_tension(f_in) -> float:
    f_in = float(f_in)
    if not f_in >= 0:
        raise InvalidArgumentError(f"tendon tension must be non-negative, got {f_in}")
    return f_in


def stiffness_vector(k, m: int | None = None) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or (m is not None and k.shape[0] != m):
        raise InvalidArgumentError(f"expected {m} stiffness values, got shape {k.shape}")
    if not np.all(k > 0) or not np.all(np.isfinite(k)):
        raise InvalidArgumentError("stiffness values must be finite and strictly positive")
    return k


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def band_angles(geom: FingerGeometry, theta) -> np.ndarray:
    """Angle between band and link at each joint: half the deflection."""
    return 0.5 * deflections(geom, theta)


def distal_force(f_in, geom: FingerGeometry, theta) -> np.ndarray:
    """Planar force of the band on the distal link, base frame."""
    f_in = _check_tension(f_in)
    q = joint_angles(geom, theta)
    delta = band_angles(geom, q)[-1]
    phi = q.sum()
    c, s = np.cos(phi), np.sin(phi)
    local = np.array([-np.sin(delta), -np.cos(delta)])
    return f_in * np.array([c * local[0] - s * local[1], s * local[0] + c * local[1]])


def band_normal_forces(f_in, geom: FingerGeometry, theta) -> np.ndarray:
    """(m-1, 2) band forces on links 0..m-2, base frame."""
    f_in = _check_tension(f_in)
    q = joint_angles(geom, theta)
    delta = band_angles(geom, q)[:-1]
    phi = np.cumsum(q)[:-1]
    mag = f_in * np.sin(delta)
    # R(phi) @ (0, -mag)
    return np.column_stack([mag * np.sin(phi), -mag * np.cos(phi)])


def spring_torques(k, geom: FingerGeometry, theta) -> np.ndarray:
    k = stiffness_vector(k, geom.joint_count)
    return k * deflections(geom, theta)


def joint_load_torques(f_in, geom: FingerGeometry, theta) -> np.ndarray:
    """Torque the band exerts about each joint.

    Joint i collects the distal force acting at the anchor plus the normal
    force of every link j >= i that the band wraps, each with its own lever
    arm about joint i.
    """
    f_in = _check_tension(f_in)
    q = joint_angles(geom, theta)
    u = kernels.load_torques_batch(np.array([f_in]), q[None, :], *geom.arrays())
    return u[0]


def joint_load_torques_explicit(f_in, geom: FingerGeometry, theta) -> np.ndarray:
    """Same quantity as :func:`joint_load_torques`, assembled from the
    force and lever-arm primitives instead of the batch kernel."""
    q = joint_angles(geom, theta)
    frames = forward_kinematics(geom, q)
    lev = lever_vectors(geom, q, frames)
    f = distal_force(f_in, geom, q)
    fN = band_normal_forces(f_in, geom, q)
    m = geom.joint_count
    u = _cross(f[None, :], lev.d)
    for i in range(m - 1):
        for j in range(i, m - 1):
            u[i] += _cross(fN[j], lev.r[i, j])
    return u


def torque_residuals(f_in, geom: FingerGeometry, theta, k) -> np.ndarray:
    """Load torque minus spring torque at every joint; zero at equilibrium."""
    k = stiffness_vector(k, geom.joint_count)
    return joint_load_torques(f_in, geom, theta) - k * deflections(geom, theta)


def torque_residuals_batch(f_in, geom: FingerGeometry, theta, k) -> np.ndarray:
    """Residuals for N states at once; ``f_in`` (N,), ``theta`` (N, m)."""
    k = stiffness_vector(k, geom.joint_count)
    f_in = np.asarray(f_in, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != geom.joint_count or f_in.shape != theta.shape[:1]:
        raise InvalidArgumentError(f"shape mismatch: f_in {f_in.shape}, theta {theta.shape}")
    if np.any(f_in < 0):
        raise InvalidArgumentError("tendon tension must be non-negative")
    lengths, along, lateral, rest = geom.arrays()
    u = kernels.load_torques_batch(f_in, theta, lengths, along, lateral, rest)
    return u - k * (theta - rest)

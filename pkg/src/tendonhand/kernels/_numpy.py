"""Vectorized numpy version of the torque kernel (no compiler needed)."""

import numpy as np


def load_torques_batch(f_in, theta, lengths, along, lateral, rest):
    f_in = np.asarray(f_in, dtype=float)
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[1]

    phi = np.cumsum(theta, axis=1)
    c, s = np.cos(phi), np.sin(phi)
    steps_x = lengths * c
    steps_y = lengths * s
    # joint i sits at the sum of the first i link vectors
    jx = np.cumsum(steps_x, axis=1) - steps_x
    jy = np.cumsum(steps_y, axis=1) - steps_y
    px = jx + c * along - s * lateral
    py = jy + s * along + c * lateral

    half = 0.5 * (theta - rest)
    sin_half = np.sin(half)
    fx = f_in * (-c[:, -1] * sin_half[:, -1] + s[:, -1] * np.cos(half[:, -1]))
    fy = f_in * (-s[:, -1] * sin_half[:, -1] - c[:, -1] * np.cos(half[:, -1]))

    dx = px[:, -1:] - jx
    dy = py[:, -1:] - jy
    u = fx[:, None] * dy - fy[:, None] * dx
    if m == 1:
        return u

    # band normal forces on links 0..m-2, torque about every joint i <= j
    nx = (f_in[:, None] * sin_half[:, :-1]) * s[:, :-1]
    ny = -(f_in[:, None] * sin_half[:, :-1]) * c[:, :-1]
    # cross(fN_j, P_j - J_i) = cross(fN_j, P_j) - cross(fN_j, J_i)
    own = nx * py[:, :-1] - ny * px[:, :-1]
    about = nx[:, None, :] * jy[:, :, None] - ny[:, None, :] * jx[:, :, None]
    mask = np.triu(np.ones((m, m - 1), dtype=bool))
    u += np.where(mask, own[:, None, :] - about, 0.0).sum(axis=2)
    return u

"""Loop-based torque kernel compiled with numba."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def load_torques_batch(f_in, theta, lengths, along, lateral, rest):
    n, m = theta.shape
    out = np.zeros((n, m))
    jx = np.empty(m)
    jy = np.empty(m)
    px = np.empty(m)
    py = np.empty(m)
    phi = np.empty(m)
    for s in range(n):
        x = 0.0
        y = 0.0
        acc = 0.0
        for i in range(m):
            acc += theta[s, i]
            phi[i] = acc
            c = math.cos(acc)
            sn = math.sin(acc)
            jx[i] = x
            jy[i] = y
            px[i] = x + c * along[i] - sn * lateral[i]
            py[i] = y + sn * along[i] + c * lateral[i]
            x += lengths[i] * c
            y += lengths[i] * sn

        fin = f_in[s]
        last = m - 1
        half = 0.5 * (theta[s, last] - rest[last])
        # R(phi) @ (-sin d, -cos d)
        c = math.cos(phi[last])
        sn = math.sin(phi[last])
        fx = fin * (-c * math.sin(half) + sn * math.cos(half))
        fy = fin * (-sn * math.sin(half) - c * math.cos(half))

        for i in range(m):
            dx = px[last] - jx[i]
            dy = py[last] - jy[i]
            u = fx * dy - fy * dx
            for j in range(i, last):
                sd = fin * math.sin(0.5 * (theta[s, j] - rest[j]))
                nx = sd * math.sin(phi[j])
                ny = -sd * math.cos(phi[j])
                u += nx * (py[j] - jy[i]) - ny * (px[j] - jx[i])
            out[s, i] = u
    return out

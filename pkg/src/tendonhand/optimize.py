"""Minimal BFGS quasi-Newton minimizer with a backtracking line search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    message: str


def bfgs(fun, grad, x0, gtol=1e-10, max_iter=500, c1=1e-4, shrink=0.5, max_backtracks=60, max_step=np.inf):
    """Minimize ``fun`` from ``x0`` using BFGS updates of the inverse Hessian.

    Stops when the max-norm of the gradient drops below ``gtol``.  The update
    is skipped whenever the curvature condition ``s.y > 0`` fails, which keeps
    the inverse Hessian positive definite with a plain Armijo search.
    Trial steps are shortened so no coordinate moves more than ``max_step``.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=float)
    H = np.eye(n)
    first = True

    for it in range(max_iter):
        if np.max(np.abs(g)) <= gtol:
            return MinimizeResult(x, f, g, it, True, "gradient tolerance reached")

        p = -H @ g
        slope = g @ p
        if slope >= 0:
            # lost descent direction; restart from steepest descent
            H = np.eye(n)
            p = -g
            slope = -(g @ g)

        t = min(1.0, max_step / np.max(np.abs(p)))
        for _ in range(max_backtracks):
            x_new = x + t * p
            f_new = float(fun(x_new))
            if np.isfinite(f_new) and f_new <= f + c1 * t * slope:
                break
            t *= shrink
        else:
            return MinimizeResult(x, f, g, it, False, "line search failed")

        g_new = np.asarray(grad(x_new), dtype=float)
        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first:
                H = np.eye(n) * (sy / (y @ y))
                first = False
            rho = 1.0 / sy
            Hy = H @ y
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * (y @ Hy) + rho) * np.outer(s, s)

        x, f, g = x_new, f_new, g_new

    converged = np.max(np.abs(g)) <= gtol
    return MinimizeResult(x, f, g, max_iter, converged, "iteration limit")

"""Quasi-static equilibrium of a tendon-loaded finger.

Solves ``u(theta; f_in) - k * (theta - rest) = 0`` for the joint angles with
a damped Newton method (central-difference Jacobian, backtracking line
search).  Deflections are projected onto ``theta >= rest`` after every step
since a tendon cannot extend the finger.  When the Jacobian is ill
conditioned or the line search stalls, a burst of damped fixed-point steps
``theta <- theta + w * (rest + u/k - theta)`` is taken before retrying
Newton.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidArgumentError, NumericalError
from .geometry import FingerGeometry, band_path_length, joint_angles
from .statics import _check_tension, stiffness_vector, torque_residuals_batch


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10  # N m, max-norm of the residual
    max_iter: int = 100
    fd_step: float = 1e-7  # rad
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 30
    cond_limit: float = 1e12
    fixed_point_step: float = 0.05
    fixed_point_burst: int = 200
    continuation_step: float = 5.0  # N, largest tension jump between warm starts

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgumentError("tolerance must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be at least 1")
        if not 0 < self.backtrack < 1 or not 0 < self.fixed_point_step <= 1:
            raise InvalidArgumentError("damping factors must lie in (0, 1)")
        if not self.continuation_step > 0:
            raise InvalidArgumentError("continuation step must be positive")


DEFAULT_OPTIONS = SolverOptions()


def clamp_set(geom: FingerGeometry, clamps) -> dict:
    """Normalize clamps to ``{joint index: angle}`` (0-based, radians).

    Accepts a mapping or an iterable of (index, angle) pairs.  Duplicate
    indices and angles outside ``[rest, pi]`` are rejected.
    """
    if not clamps:
        return {}
    pairs = clamps.items() if isinstance(clamps, dict) else clamps
    out = {}
    rest = geom.rest()
    for idx, angle in pairs:
        idx = int(idx)
        if not 0 <= idx < geom.joint_count:
            raise InvalidArgumentError(f"clamp joint index {idx} outside 0..{geom.joint_count - 1}")
        if idx in out:
            raise InvalidArgumentError(f"joint {idx} clamped twice")
        angle = float(angle)
        if not rest[idx] - 1e-12 <= angle <= np.pi:
            raise InvalidArgumentError(f"clamp angle {angle} rad for joint {idx} outside [rest, pi]")
        out[idx] = angle
    return out


@dataclass
class EquilibriumResult:
    theta: np.ndarray
    residual: np.ndarray  # signed torque residual at theta, all joints
    residual_norm: float  # over free joints, bound-aware
    iterations: int
    at_bound: np.ndarray  # free joints resting on theta == rest with residual < 0
    reactions: dict = field(default_factory=dict)  # clamped joint -> reaction torque
    fallback_steps: int = 0


def _residuals(geom, k, f_in, thetas):
    thetas = np.atleast_2d(thetas)
    r = torque_residuals_batch(np.full(len(thetas), f_in), geom, thetas, k)
    if not np.all(np.isfinite(r)):
        raise NumericalError("non-finite torque residual")
    return r


def _projected(rho, theta, rest, free):
    """Residual with complementarity at the rest bound (rho < 0 allowed there)."""
    p = rho[free].copy()
    on_bound = (theta[free] <= rest[free]) & (p < 0)
    p[on_bound] = 0.0
    return p, on_bound


def solve_equilibrium(
    geom: FingerGeometry,
    k,
    f_in,
    theta_init=None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    clamps=None,
) -> EquilibriumResult:
    """Joint angles at which the finger balances tendon tension ``f_in``.

    ``theta_init`` defaults to the rest shape.  Clamped joints (see
    :func:`clamp_set`) are held fixed and their reaction torques reported.
    """
    f_in = _check_tension(f_in)
    k = stiffness_vector(k, geom.joint_count)
    clamps = clamp_set(geom, clamps)
    rest = geom.rest()
    m = geom.joint_count
    free = np.array([i for i in range(m) if i not in clamps], dtype=int)

    theta = rest.copy() if theta_init is None else joint_angles(geom, theta_init).copy()
    for idx, angle in clamps.items():
        theta[idx] = angle
    theta[free] = np.maximum(theta[free], rest[free])

    def finish(theta, iterations, fallback=0):
        rho = _residuals(geom, k, f_in, theta)[0]
        p, on_bound = _projected(rho, theta, rest, free)
        at_bound = np.zeros(m, dtype=bool)
        at_bound[free] = on_bound
        return EquilibriumResult(
            theta=theta,
            residual=rho,
            residual_norm=float(np.max(np.abs(p), initial=0.0)),
            iterations=iterations,
            at_bound=at_bound,
            reactions={i: float(-rho[i]) for i in clamps},
            fallback_steps=fallback,
        )

    if f_in == 0.0:
        # no load: the springs alone hold the free joints at rest
        theta[free] = rest[free]
        return finish(theta, 0)
    if free.size == 0:
        return finish(theta, 0)

    n_free = free.size
    h = opts.fd_step
    eye = np.eye(n_free)
    fallback = 0

    rho = _residuals(geom, k, f_in, theta)[0]
    p, _ = _projected(rho, theta, rest, free)
    norm = np.max(np.abs(p))
    best_theta, best_norm = theta.copy(), norm

    for it in range(opts.max_iter):
        if norm <= opts.tol:
            return finish(theta, it, fallback)

        # central-difference Jacobian over free joints, one batched evaluation
        probes = np.repeat(theta[None, :], 2 * n_free, axis=0)
        probes[:n_free, free] += h * eye
        probes[n_free:, free] -= h * eye
        r = _residuals(geom, k, f_in, probes)[:, free]
        J = (r[:n_free] - r[n_free:]).T / (2 * h)

        step = None
        with np.errstate(all="ignore"):
            if np.all(np.isfinite(J)) and np.linalg.cond(J) < opts.cond_limit:
                step = np.linalg.solve(J, -rho[free])

        accepted = False
        if step is not None:
            t = 1.0
            merit = np.linalg.norm(p)
            for _ in range(opts.max_backtracks):
                trial = theta.copy()
                trial[free] = np.maximum(theta[free] + t * step, rest[free])
                trial_rho = _residuals(geom, k, f_in, trial)[0]
                trial_p, _ = _projected(trial_rho, trial, rest, free)
                if np.linalg.norm(trial_p) <= (1.0 - opts.armijo * t) * merit:
                    theta, rho, p = trial, trial_rho, trial_p
                    accepted = True
                    break
                t *= opts.backtrack

        if not accepted:
            kf = k[free]
            for _ in range(opts.fixed_point_burst):
                target = rest[free] + (rho[free] + kf * (theta[free] - rest[free])) / kf
                theta = theta.copy()
                theta[free] = np.maximum(theta[free] + opts.fixed_point_step * (target - theta[free]), rest[free])
                rho = _residuals(geom, k, f_in, theta)[0]
                fallback += 1
            p, _ = _projected(rho, theta, rest, free)

        norm = np.max(np.abs(p))
        if norm < best_norm:
            best_theta, best_norm = theta.copy(), norm

    if norm <= opts.tol:
        return finish(theta, opts.max_iter, fallback)
    raise ConvergenceError(
        f"equilibrium solve did not converge in {opts.max_iter} iterations "
        f"(residual {best_norm:.3e} N m at f_in={f_in:g} N)",
        best=best_theta,
        residual_norm=float(best_norm),
    )


def solve_with_clamps(geom, k, f_in, clamps, theta_init=None, opts: SolverOptions = DEFAULT_OPTIONS):
    """Equilibrium with some joints blocked; see :class:`EquilibriumResult`.reactions."""
    return solve_equilibrium(geom, k, f_in, theta_init=theta_init, opts=opts, clamps=clamps)


def tendon_excursion(geom: FingerGeometry, theta) -> float:
    """Shortening of the routed band path relative to the rest shape [m]."""
    return band_path_length(geom, geom.rest()) - band_path_length(geom, theta)


@dataclass(frozen=True)
class FlexionTrajectory:
    forces: np.ndarray  # (n,)
    thetas: np.ndarray  # (n, m)
    excursions: np.ndarray  # (n,)
    results: tuple = ()


def force_ramp(
    geom: FingerGeometry,
    k,
    schedule,
    opts: SolverOptions = DEFAULT_OPTIONS,
    clamps=None,
    on_step=None,
) -> FlexionTrajectory:
    """Follow the equilibrium along an increasing tension schedule.

    Each solve warm-starts from the previous solution; gaps wider than
    ``opts.continuation_step`` are bridged with unrecorded intermediate
    solves.  Solver failures are re-raised with ``.index`` set to the
    schedule position.  ``on_step(index, f_in, result)`` is called after
    every recorded solve.
    """
    forces = np.asarray(schedule, dtype=float).ravel()
    if forces.size == 0:
        raise InvalidArgumentError("force schedule is empty")
    if forces[0] < 0 or np.any(np.diff(forces) <= 0):
        raise InvalidArgumentError("force schedule must be non-negative and strictly increasing")

    theta = None
    prev = 0.0
    results = []
    for idx, f in enumerate(forces):
        try:
            n_sub = int(np.ceil((f - prev) / opts.continuation_step)) if theta is not None else 0
            for f_mid in np.linspace(prev, f, n_sub + 1)[1:-1]:
                theta = solve_equilibrium(geom, k, f_mid, theta, opts, clamps).theta
            res = solve_equilibrium(geom, k, f, theta, opts, clamps)
        except (ConvergenceError, NumericalError) as exc:
            exc.index = idx
            raise
        theta = res.theta
        prev = f
        results.append(res)
        if on_step is not None:
            on_step(idx, f, res)

    thetas = np.array([r.theta for r in results])
    excursions = np.array([tendon_excursion(geom, t) for t in thetas])
    return FlexionTrajectory(forces=forces, thetas=thetas, excursions=excursions, results=tuple(results))

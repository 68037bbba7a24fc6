"""Joint stiffness identification from recorded flexion data.

Each sample gives a tendon tension and the measured joint angles.  The
objective is the sum of squared torque-balance residuals over all samples,
so no equilibrium solve is needed while fitting: the load torques depend on
the measured angles only and the residual is linear in the stiffnesses.
Stiffnesses are optimized in log space to keep them positive.  Agreement in
angle space is then checked by forward-solving the model at each sample.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .equilibrium import DEFAULT_OPTIONS, SolverOptions, force_ramp, solve_equilibrium
from .errors import ConvergenceError, IdentifiabilityWarning, InvalidArgumentError, NumericalError
from .geometry import FingerGeometry
from .optimize import bfgs
from .statics import stiffness_vector

IDENTIFIABILITY_RATIO = 1e-10


@dataclass(frozen=True)
class FlexionDataset:
    forces: np.ndarray  # (N,) tendon tension [N]
    angles: np.ndarray  # (N, m) measured joint angles [rad]
    cycles: np.ndarray | None = None  # (N,) flexion-cycle id
    sample_ids: np.ndarray | None = None

    def __post_init__(self):
        forces = np.asarray(self.forces, dtype=float).ravel()
        angles = np.atleast_2d(np.asarray(self.angles, dtype=float))
        if angles.shape[0] != forces.shape[0]:
            raise InvalidArgumentError(f"{forces.shape[0]} forces but {angles.shape[0]} angle rows")
        if np.any(~np.isfinite(forces)) or np.any(forces < 0):
            raise InvalidArgumentError("tendon tensions must be finite and non-negative")
        if not np.all(np.isfinite(angles)):
            raise InvalidArgumentError("angles must be finite")
        if forces.shape[0] < angles.shape[1]:
            raise InvalidArgumentError(f"need at least {angles.shape[1]} samples to identify {angles.shape[1]} stiffnesses")
        object.__setattr__(self, "forces", forces)
        object.__setattr__(self, "angles", angles)
        ids = np.arange(forces.size) if self.sample_ids is None else np.asarray(self.sample_ids)
        object.__setattr__(self, "sample_ids", ids)

    def __len__(self):
        return self.forces.size

    @property
    def joint_count(self) -> int:
        return self.angles.shape[1]

    def subset(self, mask) -> "FlexionDataset":
        return FlexionDataset(
            self.forces[mask],
            self.angles[mask],
            None if self.cycles is None else np.asarray(self.cycles)[mask],
            self.sample_ids[mask],
        )


def _check(data: FlexionDataset, geom: FingerGeometry):
    if data.joint_count != geom.joint_count:
        raise InvalidArgumentError(
            f"dataset has {data.joint_count} angle columns, geometry has {geom.joint_count} joints"
        )


def _load_and_deflection(data: FlexionDataset, geom: FingerGeometry):
    _check(data, geom)
    lengths, along, lateral, rest = geom.arrays()
    U = kernels.load_torques_batch(data.forces, data.angles, lengths, along, lateral, rest)
    return U, data.angles - rest


def residual_objective(k, data: FlexionDataset, geom: FingerGeometry) -> float:
    """Sum over samples of the squared torque residual norm."""
    k = stiffness_vector(k, geom.joint_count)
    U, D = _load_and_deflection(data, geom)
    return float(np.sum((U - k * D) ** 2))


def objective_gradient(k, data: FlexionDataset, geom: FingerGeometry) -> np.ndarray:
    """Gradient of :func:`residual_objective` with respect to the stiffnesses."""
    k = stiffness_vector(k, geom.joint_count)
    U, D = _load_and_deflection(data, geom)
    return -2.0 * np.sum(D * (U - k * D), axis=0)


@dataclass
class PredictionErrors:
    predicted: np.ndarray  # (N, m) rad, NaN where the solve failed
    errors_deg: np.ndarray  # (N, m) absolute angle errors
    mean_deg: float
    std_deg: float
    failures: int

    def summary(self) -> str:
        return format_error(self.mean_deg, self.std_deg)


def format_error(mean_deg: float, std_deg: float) -> str:
    return f"{mean_deg:.2f}° ± {std_deg:.2f}°"


def prediction_errors(k, data: FlexionDataset, geom: FingerGeometry, opts: SolverOptions = DEFAULT_OPTIONS) -> PredictionErrors:
    """Forward-solve the model at every sample tension and compare angles.

    Samples are visited in order of increasing tension so each solve can
    warm-start from the previous one.  Failed solves are excluded from the
    statistics and counted.
    """
    _check(data, geom)
    k = stiffness_vector(k, geom.joint_count)
    predicted = np.full(data.angles.shape, np.nan)
    theta = None
    failures = 0
    for idx in np.argsort(data.forces, kind="stable"):
        try:
            theta = solve_equilibrium(geom, k, data.forces[idx], theta, opts).theta
        except (ConvergenceError, NumericalError):
            failures += 1
            theta = None
            continue
        predicted[idx] = theta
    errors = np.rad2deg(np.abs(predicted - data.angles))
    ok = errors[np.all(np.isfinite(errors), axis=1)]
    mean = float(ok.mean()) if ok.size else float("nan")
    std = float(ok.std()) if ok.size else float("nan")
    return PredictionErrors(predicted, errors, mean, std, failures)


@dataclass
class FitResult:
    stiffness: np.ndarray
    objective: float
    initial_objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    curvature: np.ndarray  # Gauss-Newton curvature eigenvalues in log-stiffness space
    prediction: PredictionErrors | None = None
    warning: str | None = None
    excluded: int = 0
    message: str = field(default="")

    @property
    def error_mean_deg(self) -> float:
        return self.prediction.mean_deg if self.prediction else float("nan")

    @property
    def error_std_deg(self) -> float:
        return self.prediction.std_deg if self.prediction else float("nan")


def fit_stiffness(
    data: FlexionDataset,
    geom: FingerGeometry,
    k_init,
    opts: SolverOptions = DEFAULT_OPTIONS,
    gtol: float = 1e-10,
    max_iter: int = 500,
    min_tension: float = 0.0,
    predict: bool = True,
) -> FitResult:
    """Least-squares stiffness estimate by BFGS in log-stiffness space.

    ``gtol`` bounds the max-norm of the log-space gradient, scaled by the
    starting objective when that exceeds one.  Samples below ``min_tension`` are dropped before fitting (useful to
    skip the slack-band phase at the start of a pull).  Raises
    :class:`ConvergenceError` carrying the best stiffness if BFGS stops
    short of ``gtol``.
    """
    _check(data, geom)
    k0 = stiffness_vector(k_init, geom.joint_count)
    keep = data.forces >= min_tension
    fit_data = data if keep.all() else data.subset(keep)
    if len(fit_data) < geom.joint_count:
        raise InvalidArgumentError("too few samples left after the tension threshold")

    U, D = _load_and_deflection(fit_data, geom)

    def fun(x):
        return float(np.sum((U - np.exp(x) * D) ** 2))

    def grad(x):
        kx = np.exp(x)
        return -2.0 * kx * np.sum(D * (U - kx * D), axis=0)

    x0 = np.log(k0)
    f0 = fun(x0)
    # gradient tolerance is relative to the objective's starting magnitude
    res = bfgs(fun, grad, x0, gtol=gtol * max(1.0, f0), max_iter=max_iter, max_step=1.0)
    k_star = np.exp(res.x)
    if not res.converged:
        raise ConvergenceError(
            f"stiffness fit stopped: {res.message} (|grad| {np.max(np.abs(res.grad)):.3e})",
            best=k_star,
            residual_norm=res.fun,
        )

    # Gauss-Newton curvature of the log-space objective is diagonal
    curvature = 2.0 * k_star**2 * np.sum(D**2, axis=0)
    warning = None
    top = curvature.max()
    if top <= 0 or curvature.min() / top < IDENTIFIABILITY_RATIO:
        warning = (
            "data does not excite every joint: curvature eigenvalues "
            + ", ".join(f"{c:.3g}" for c in curvature)
        )
        warnings.warn(warning, IdentifiabilityWarning, stacklevel=2)

    return FitResult(
        stiffness=k_star,
        objective=res.fun,
        initial_objective=f0,
        iterations=res.iterations,
        converged=True,
        gradient_norm=float(np.max(np.abs(res.grad))),
        curvature=curvature,
        prediction=prediction_errors(k_star, data, geom, opts) if predict else None,
        warning=warning,
        excluded=int((~keep).sum()),
        message=res.message,
    )


def generate_synthetic_dataset(
    geom: FingerGeometry,
    k,
    f_grid,
    noise_std_deg: float = 0.0,
    seed=None,
    cycles: int = 1,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> FlexionDataset:
    """Model equilibria at each tension in ``f_grid``, repeated ``cycles`` times,
    with i.i.d. Gaussian angle noise.  Deterministic for a fixed seed."""
    k = stiffness_vector(k, geom.joint_count)
    f_grid = np.asarray(f_grid, dtype=float).ravel()
    if f_grid.size == 0 or np.any(f_grid < 0):
        raise InvalidArgumentError("force grid must be non-empty and non-negative")
    if cycles < 1:
        raise InvalidArgumentError("cycles must be at least 1")

    levels, inverse = np.unique(f_grid, return_inverse=True)
    traj = force_ramp(geom, k, levels, opts)
    clean = traj.thetas[inverse]

    forces = np.tile(f_grid, cycles)
    angles = np.tile(clean, (cycles, 1))
    if noise_std_deg > 0:
        rng = np.random.default_rng(seed)
        angles = angles + rng.normal(0.0, np.deg2rad(noise_std_deg), size=angles.shape)
    cycle_ids = np.repeat(np.arange(cycles), f_grid.size)
    return FlexionDataset(forces, angles, cycle_ids)

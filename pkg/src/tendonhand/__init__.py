"""Quasi-static model, calibration and hand analysis for underactuated
tendon-driven compliant fingers."""

from .calibration import (
    FitResult,
    FlexionDataset,
    fit_stiffness,
    format_error,
    generate_synthetic_dataset,
    objective_gradient,
    prediction_errors,
    residual_objective,
)
from .equilibrium import (
    EquilibriumResult,
    FlexionTrajectory,
    SolverOptions,
    force_ramp,
    solve_equilibrium,
    solve_with_clamps,
    tendon_excursion,
)
from .errors import ConvergenceError, IdentifiabilityWarning, InvalidArgumentError, NumericalError
from .geometry import (
    FingerGeometry,
    FrameSet,
    forward_kinematics,
    lever_vectors,
    reference_geometry,
    scale_geometry,
)
from .hand import HandLayout, HandModel, HandState, aperture, assemble_hand, solve_hand, solve_hand_displacement
from .statics import (
    band_angles,
    band_normal_forces,
    distal_force,
    joint_load_torques,
    spring_torques,
    torque_residuals,
)

__version__ = "0.1.0"

"""Multi-finger hands driven through a pulley differential.

Fingers sit at equal azimuth steps on a circle around the hand axis (z),
each flexing in the plane spanned by the axis and its radial direction,
toward the axis.  A two-finger hand is the opposed special case.

The actuator pulls a single loop that all bands meet at.  With a
frictionless movable pulley every band carries the same tension, so the
actuator force splits equally.  The loop travels by the mean of the band
excursions, which lets a blocked finger's share be taken up by the others
when the actuator is displacement controlled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

from .equilibrium import DEFAULT_OPTIONS, SolverOptions, solve_equilibrium, tendon_excursion
from .errors import ConvergenceError, InvalidArgumentError, NumericalError
from .geometry import FingerGeometry, forward_kinematics
from .statics import stiffness_vector


@dataclass(frozen=True)
class HandLayout:
    base_radius: float  # m, distance of each finger base from the hand axis
    mount_angle: float = 0.0  # rad, in-plane rotation of the finger base frame

    def scaled(self, kappa: float) -> "HandLayout":
        return replace(self, base_radius=self.base_radius * kappa)


def default_layout(geom: FingerGeometry) -> HandLayout:
    """Bases half a finger length off the axis, tilted so that the proximal
    link stands parallel to the axis at rest."""
    return HandLayout(base_radius=0.5 * geom.finger_length, mount_angle=-geom.rest_angles[0])


@dataclass(frozen=True)
class HandModel:
    geometry: FingerGeometry
    stiffness: np.ndarray  # (n, m)
    finger_count: int
    layout: HandLayout

    @property
    def azimuths(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.finger_count) / self.finger_count

    def base_positions(self) -> np.ndarray:
        a = self.azimuths
        r = self.layout.base_radius
        return np.column_stack([r * np.cos(a), r * np.sin(a), np.zeros_like(a)])

    def to_world(self, finger: int, point) -> np.ndarray:
        """Map a planar point of finger ``finger``'s base frame into the hand frame."""
        x, y = point
        c, s = np.cos(self.layout.mount_angle), np.sin(self.layout.mount_angle)
        axial = c * x - s * y
        inward = s * x + c * y
        a = self.azimuths[finger]
        radial = np.array([np.cos(a), np.sin(a), 0.0])
        return self.base_positions()[finger] + axial * np.array([0.0, 0.0, 1.0]) - inward * radial


def assemble_hand(geom: FingerGeometry, k, n: int, layout: HandLayout | None = None) -> HandModel:
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"a hand needs at least two fingers, got {n}")
    n = int(n)
    k = np.asarray(k, dtype=float)
    if k.ndim == 1:
        k = np.tile(stiffness_vector(k, geom.joint_count), (n, 1))
    if k.shape != (n, geom.joint_count):
        raise InvalidArgumentError(f"stiffness must be ({geom.joint_count},) or ({n}, {geom.joint_count})")
    for row in k:
        stiffness_vector(row, geom.joint_count)
    layout = layout or default_layout(geom)
    if not layout.base_radius > 0:
        raise InvalidArgumentError("finger bases must sit off the hand axis (base_radius > 0)")
    return HandModel(geom, k, n, layout)


@dataclass
class HandState:
    thetas: np.ndarray  # (n, m)
    tensions: np.ndarray  # (n,)
    actuator_force: float
    pull_displacement: float  # m, travel of the pull loop
    excursions: np.ndarray  # (n,)
    reactions: list  # per finger: {joint: reaction torque}
    residual_norms: np.ndarray  # (n,)


def _finger_clamps(clamps_per_finger, n):
    clamps_per_finger = clamps_per_finger or {}
    for f in clamps_per_finger:
        if not 0 <= int(f) < n:
            raise InvalidArgumentError(f"clamp refers to finger {f}, hand has {n}")
    return [clamps_per_finger.get(f) for f in range(n)]


def _solve_fingers(hand, tension, clamps, opts, theta_init=None):
    results = []
    for f in range(hand.finger_count):
        init = None if theta_init is None else theta_init[f]
        try:
            results.append(solve_equilibrium(hand.geometry, hand.stiffness[f], tension, init, opts, clamps[f]))
        except (ConvergenceError, NumericalError) as exc:
            exc.index = f
            raise
    return results


def _state(hand, tension, results) -> HandState:
    thetas = np.array([r.theta for r in results])
    excursions = np.array([tendon_excursion(hand.geometry, t) for t in thetas])
    n = hand.finger_count
    return HandState(
        thetas=thetas,
        tensions=np.full(n, tension),
        actuator_force=tension * n,
        pull_displacement=float(excursions.mean()),
        excursions=excursions,
        reactions=[r.reactions for r in results],
        residual_norms=np.array([r.residual_norm for r in results]),
    )


def solve_hand(
    hand: HandModel,
    actuator_force: float,
    clamps_per_finger: dict | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    theta_init=None,
) -> HandState:
    """Force-controlled closing: every band carries ``actuator_force / n``.

    ``clamps_per_finger`` maps a finger index to its clamp set.  Solver
    failures are re-raised with ``.index`` set to the finger.
    """
    actuator_force = float(actuator_force)
    if not actuator_force >= 0:
        raise InvalidArgumentError("actuator force must be non-negative")
    clamps = _finger_clamps(clamps_per_finger, hand.finger_count)
    tension = actuator_force / hand.finger_count
    return _state(hand, tension, _solve_fingers(hand, tension, clamps, opts, theta_init))


def solve_hand_displacement(
    hand: HandModel,
    pull_displacement: float,
    clamps_per_finger: dict | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    max_tension: float = 1e5,
) -> HandState:
    """Displacement-controlled closing: find the common band tension at
    which the pull loop has travelled ``pull_displacement`` meters."""
    target = float(pull_displacement)
    if not target >= 0:
        raise InvalidArgumentError("pull displacement must be non-negative")
    clamps = _finger_clamps(clamps_per_finger, hand.finger_count)

    def travel(t):
        return _state(hand, t, _solve_fingers(hand, t, clamps, opts)).pull_displacement

    zero = travel(0.0)
    if target <= zero:
        return solve_hand(hand, 0.0, clamps_per_finger, opts)

    hi = 1.0
    while travel(hi) < target:
        hi *= 2.0
        if hi > max_tension:
            raise InvalidArgumentError(
                f"pull displacement {target * 1e3:.3g} mm not reachable below {max_tension:g} N band tension"
            )
    tension = brentq(lambda t: travel(t) - target, hi / 2.0 if hi > 1.0 else 0.0, hi, xtol=1e-12, rtol=1e-14)
    return _state(hand, tension, _solve_fingers(hand, tension, clamps, opts))


def fingertips(hand: HandModel, thetas) -> np.ndarray:
    """(n, 3) fingertip positions in the hand frame."""
    thetas = np.asarray(thetas, dtype=float)
    return np.array([hand.to_world(f, forward_kinematics(hand.geometry, thetas[f]).tip) for f in range(hand.finger_count)])


def aperture(hand: HandModel, state: HandState) -> float:
    """Smallest fingertip-to-fingertip distance over all finger pairs."""
    tips = fingertips(hand, state.thetas)
    return float(min(np.linalg.norm(tips[a] - tips[b]) for a, b in combinations(range(len(tips)), 2)))

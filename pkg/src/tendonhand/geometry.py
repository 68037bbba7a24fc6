"""Finger geometry, uniform scaling and planar forward kinematics.

Conventions: all points live in the finger base frame (the fixed support
flange), x along the straight finger, y on the flexion side.  Joint i
rotates link i relative to link i-1 counterclockwise, so the orientation of
link i is the partial sum of joint angles.  Lengths are in meters and angles
in radians.  Index 0 is the proximal joint.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgumentError

REFERENCE_FINGER_LENGTH = 0.052
# proximal, middle, distal link at kappa = 1
REFERENCE_LINK_LENGTHS = (0.020, 0.017, 0.015)
REFERENCE_PAD_OFFSET = 0.004


def _tuple(values) -> tuple:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class FingerGeometry:
    """Planar serial-chain description of one finger.

    ``routing_along[i]``/``routing_lateral[i]`` locate where the band bears on
    link i (in link-i coordinates, measured from joint i).  The last entry is
    the band anchor on the distal link.  ``base_routing`` is the band entry
    point on the support flange given as (distance behind joint 0, lateral
    offset); it only matters for tendon excursion.
    """

    link_lengths: tuple
    rest_angles: tuple
    routing_along: tuple
    routing_lateral: tuple
    base_routing: tuple = (0.0, 0.0)
    pad_offsets: tuple = field(default=())
    scale: float = 1.0
    reference_length: float | None = None

    def __post_init__(self):
        m = len(self.link_lengths)
        for name in ("link_lengths", "rest_angles", "routing_along", "routing_lateral", "base_routing"):
            object.__setattr__(self, name, _tuple(getattr(self, name)))
        pads = self.pad_offsets if len(self.pad_offsets) else np.zeros(m)
        object.__setattr__(self, "pad_offsets", _tuple(pads))
        object.__setattr__(self, "scale", float(self.scale))

        if m < 1:
            raise InvalidArgumentError("a finger needs at least one joint")
        for name in ("rest_angles", "routing_along", "routing_lateral", "pad_offsets"):
            if len(getattr(self, name)) != m:
                raise InvalidArgumentError(f"{name} must have {m} entries, got {len(getattr(self, name))}")
        if len(self.base_routing) != 2:
            raise InvalidArgumentError("base_routing must be a (behind, lateral) pair")
        if not np.all(np.isfinite(self.link_lengths)) or min(self.link_lengths) <= 0:
            raise InvalidArgumentError("link lengths must be strictly positive")
        if min(self.routing_lateral) <= 0:
            raise InvalidArgumentError("band lateral offsets must be strictly positive (flexion side)")
        if min(self.routing_along) < 0 or min(self.pad_offsets) < 0 or min(self.base_routing) < 0:
            raise InvalidArgumentError("routing and pad offsets must be non-negative")
        if not self.scale > 0:
            raise InvalidArgumentError("scale must be positive")
        if self.reference_length is not None:
            unscaled = sum(self.link_lengths) / self.scale
            if abs(unscaled - self.reference_length) > 1e-9 * self.reference_length:
                raise InvalidArgumentError(
                    f"link lengths sum to {unscaled * 1e3:.6g} mm at scale 1, "
                    f"expected reference length {self.reference_length * 1e3:.6g} mm"
                )

    @property
    def joint_count(self) -> int:
        return len(self.link_lengths)

    @property
    def finger_length(self) -> float:
        return float(sum(self.link_lengths))

    def arrays(self):
        """(lengths, along, lateral, rest) as float arrays, the kernel layout."""
        return (
            np.array(self.link_lengths),
            np.array(self.routing_along),
            np.array(self.routing_lateral),
            np.array(self.rest_angles),
        )

    def rest(self) -> np.ndarray:
        return np.array(self.rest_angles)


def reference_geometry(scale: float = 1.0, rest_angle_deg: float = 50.0) -> FingerGeometry:
    """Three-joint finger, 52 mm long at scale 1.

    Band contacts sit mid-link with a lateral offset of 15% of the link
    length, clear of the pad bulge.
    """
    lengths = np.array(REFERENCE_LINK_LENGTHS)
    base = FingerGeometry(
        link_lengths=lengths,
        rest_angles=(np.deg2rad(rest_angle_deg), 0.0, 0.0),
        routing_along=0.5 * lengths,
        routing_lateral=0.15 * lengths,
        base_routing=(0.5 * lengths[0], 0.15 * lengths[0]),
        pad_offsets=np.full(3, REFERENCE_PAD_OFFSET),
        reference_length=REFERENCE_FINGER_LENGTH,
    )
    return base if scale == 1.0 else scale_geometry(base, scale)


def scale_geometry(geom: FingerGeometry, kappa: float) -> FingerGeometry:
    """Scale every length of the finger by ``kappa``; angles are untouched."""
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa <= 0:
        raise InvalidArgumentError(f"scale factor must be positive, got {kappa}")
    if kappa == 1.0:
        return geom

    def mul(values):
        return tuple(v * kappa for v in values)

    return replace(
        geom,
        link_lengths=mul(geom.link_lengths),
        routing_along=mul(geom.routing_along),
        routing_lateral=mul(geom.routing_lateral),
        base_routing=mul(geom.base_routing),
        pad_offsets=mul(geom.pad_offsets),
        scale=geom.scale * kappa,
    )


def joint_angles(geom: FingerGeometry, theta) -> np.ndarray:
    """Validate a joint angle vector against ``geom`` and return it as an array."""
    q = np.asarray(theta, dtype=float)
    if q.shape != (geom.joint_count,):
        raise InvalidArgumentError(f"expected {geom.joint_count} joint angles, got shape {q.shape}")
    return q


def deflections(geom: FingerGeometry, theta) -> np.ndarray:
    return joint_angles(geom, theta) - geom.rest()


def _rot(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class FrameSet:
    link_angles: np.ndarray  # (m,) orientation of each link
    joints: np.ndarray  # (m, 2) joint positions, joint 0 at the origin
    routing: np.ndarray  # (m-1, 2) band contacts on links 0..m-2
    anchor: np.ndarray  # (2,) band anchor on the distal link
    tip: np.ndarray  # (2,)
    base_routing: np.ndarray  # (2,) band entry on the flange
    pads: np.ndarray  # (m, 2) mid-link contact pad surface points


def forward_kinematics(geom: FingerGeometry, theta) -> FrameSet:
    q = joint_angles(geom, theta)
    m = geom.joint_count
    lengths, along, lateral, _ = geom.arrays()
    phi = np.cumsum(q)

    joints = np.zeros((m, 2))
    contacts = np.zeros((m, 2))
    pads = np.zeros((m, 2))
    pos = np.zeros(2)
    for i in range(m):
        R = _rot(phi[i])
        joints[i] = pos
        contacts[i] = pos + R @ (along[i], lateral[i])
        pads[i] = pos + R @ (0.5 * lengths[i], geom.pad_offsets[i])
        pos = pos + lengths[i] * R[:, 0]

    behind, side = geom.base_routing
    return FrameSet(
        link_angles=phi,
        joints=joints,
        routing=contacts[:-1],
        anchor=contacts[-1],
        tip=pos,
        base_routing=np.array([-behind, side]),
        pads=pads,
    )


@dataclass(frozen=True)
class LeverVectors:
    d: np.ndarray  # (m, 2): joint i -> band anchor
    r: np.ndarray  # (m-1, m-1, 2): r[i, j] joint i -> contact on link j, NaN where i > j


def lever_vectors(geom: FingerGeometry, theta, frames: FrameSet | None = None) -> LeverVectors:
    frames = frames if frames is not None else forward_kinematics(geom, theta)
    m = geom.joint_count
    d = frames.anchor[None, :] - frames.joints
    r = np.full((m - 1, m - 1, 2), np.nan)
    for i in range(m - 1):
        for j in range(i, m - 1):
            r[i, j] = frames.routing[j] - frames.joints[i]
    return LeverVectors(d=d, r=r)


def band_path_length(geom: FingerGeometry, theta) -> float:
    """Length of the band polyline from the flange entry to the distal anchor."""
    fr = forward_kinematics(geom, theta)
    pts = np.vstack([fr.base_routing, fr.routing, fr.anchor])
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))

"""Config and CSV formats.

Geometry config is an INI file with explicit units in the key names.
Lengths are given for the unscaled (kappa = 1) finger and ``scale`` is
applied on load::

    [finger]
    link_lengths_mm = 20, 17, 15
    rest_angles_deg = 50, 0, 0
    routing_along_mm = 10, 8.5, 7.5        ; optional, default mid-link
    routing_lateral_mm = 3, 2.55, 2.25     ; optional, default 15% of link
    base_routing_mm = 10, 3                ; optional, behind joint 1, lateral
    pad_offsets_mm = 4, 4, 4               ; optional
    reference_length_mm = 52               ; optional consistency check
    scale = 1.5

    [stiffness]
    k_Nm_per_rad = 28.48, 4.05, 4.05

    [hand]
    fingers = 2
    base_radius_mm = 26                    ; at scale 1
    mount_angle_deg = -50

Flexion datasets are CSV with header
``sample_id,f_in_N,theta1_deg,...,thetam_deg``.  ``sample_id`` and a
``cycle`` column are optional; ``actuator_torque_Nm`` plus
``pulley_radius_m`` may replace ``f_in_N``.  Columns named ``theta<i>_rad``
are read as radians.
"""

from __future__ import annotations

import configparser
import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import FlexionDataset
from .errors import InvalidArgumentError
from .geometry import REFERENCE_PAD_OFFSET, FingerGeometry, scale_geometry
from .hand import HandLayout


class ConfigError(InvalidArgumentError):
    pass


class DataParseError(InvalidArgumentError):
    def __init__(self, message, path=None, row=None, column=None):
        where = ", ".join(
            part
            for part in (
                str(path) if path else "",
                f"line {row}" if row is not None else "",
                f"column {column!r}" if column else "",
            )
            if part
        )
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.row = row
        self.column = column


@dataclass(frozen=True)
class FingerConfig:
    unscaled: FingerGeometry
    scale: float = 1.0
    stiffness: np.ndarray | None = None
    fingers: int = 2
    base_radius: float | None = None  # m at scale 1
    mount_angle: float | None = None  # rad

    @property
    def geometry(self) -> FingerGeometry:
        return scale_geometry(self.unscaled, self.scale)

    def layout(self, kappa: float | None = None) -> HandLayout | None:
        kappa = self.scale if kappa is None else kappa
        geom = scale_geometry(self.unscaled, kappa)
        radius = 0.5 * geom.finger_length if self.base_radius is None else self.base_radius * kappa
        mount = -geom.rest_angles[0] if self.mount_angle is None else self.mount_angle
        return HandLayout(base_radius=radius, mount_angle=mount)


def _line_of(text: str, key: str) -> int | None:
    for n, line in enumerate(text.splitlines(), start=1):
        if re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return n
    return None


def load_config(path) -> FingerConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not parser.has_section("finger"):
        raise ConfigError(f"{path}: missing [finger] section")

    def values(section, key, required=False, per_unit=1.0):
        if not parser.has_option(section, key):
            if required:
                raise ConfigError(f"{path}: [{section}] missing required key {key!r}")
            return None
        raw = parser.get(section, key)
        try:
            return np.array([float(v) for v in raw.split(",") if v.strip()]) / per_unit
        except ValueError:
            raise ConfigError(f"{path}, line {_line_of(text, key)}: [{section}] {key} = {raw!r} is not a number list") from None

    lengths = values("finger", "link_lengths_mm", required=True, per_unit=1e3)
    m = lengths.size
    rest = values("finger", "rest_angles_deg")
    rest = np.zeros(m) if rest is None else np.deg2rad(rest)
    along = values("finger", "routing_along_mm", per_unit=1e3)
    lateral = values("finger", "routing_lateral_mm", per_unit=1e3)
    base = values("finger", "base_routing_mm", per_unit=1e3)
    pads = values("finger", "pad_offsets_mm", per_unit=1e3)
    ref = values("finger", "reference_length_mm", per_unit=1e3)
    scale = values("finger", "scale")

    try:
        unscaled = FingerGeometry(
            link_lengths=lengths,
            rest_angles=rest,
            routing_along=0.5 * lengths if along is None else along,
            routing_lateral=0.15 * lengths if lateral is None else lateral,
            base_routing=(0.5 * lengths[0], 0.15 * lengths[0]) if base is None else base,
            pad_offsets=np.full(m, REFERENCE_PAD_OFFSET) if pads is None else pads,
            reference_length=None if ref is None else float(ref[0]),
        )
    except InvalidArgumentError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    k = values("stiffness", "k_Nm_per_rad") if parser.has_section("stiffness") else None
    if k is not None and (k.size != m or np.any(k <= 0)):
        raise ConfigError(f"{path}, line {_line_of(text, 'k_Nm_per_rad')}: need {m} positive stiffness values")

    fingers, radius, mount = 2, None, None
    if parser.has_section("hand"):
        try:
            fingers = parser.getint("hand", "fingers", fallback=2)
        except ValueError:
            raise ConfigError(f"{path}, line {_line_of(text, 'fingers')}: fingers must be an integer") from None
        r = values("hand", "base_radius_mm", per_unit=1e3)
        radius = None if r is None else float(r[0])
        a = values("hand", "mount_angle_deg")
        mount = None if a is None else float(np.deg2rad(a[0]))

    kappa = 1.0 if scale is None else float(scale[0])
    if not kappa > 0:
        raise ConfigError(f"{path}, line {_line_of(text, 'scale')}: scale must be positive")
    return FingerConfig(unscaled, kappa, k, fingers, radius, mount)


def _num(value: float) -> str:
    return format(float(value), ".12g")


def write_csv(path, header, rows):
    """UTF-8, LF line endings, '.' decimals."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])


def open_csv_writer(path, header):
    fh = open(path, "w", encoding="utf-8", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)

    def write(row):
        writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
        fh.flush()

    return fh, write


_THETA = re.compile(r"^theta(\d+)_(deg|rad)$")


def read_dataset(path, radians: bool = False) -> FlexionDataset:
    """Parse a flexion dataset CSV; errors name the offending line and column."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataParseError("empty file", path) from None

        theta_cols = {}
        for col, name in enumerate(header):
            m = _THETA.match(name)
            if m:
                theta_cols[int(m.group(1))] = (col, name, m.group(2))
        if not theta_cols:
            raise DataParseError("no theta<i>_deg columns in header", path, 1)
        m = len(theta_cols)
        if sorted(theta_cols) != list(range(1, m + 1)):
            raise DataParseError(f"angle columns must be theta1..theta{m}", path, 1)

        def col(name):
            return header.index(name) if name in header else None

        f_col = col("f_in_N")
        torque_col, radius_col = col("actuator_torque_Nm"), col("pulley_radius_m")
        if f_col is None and (torque_col is None or radius_col is None):
            raise DataParseError("need f_in_N or actuator_torque_Nm + pulley_radius_m", path, 1)
        id_col, cycle_col = col("sample_id"), col("cycle")

        forces, angles, ids, cycles = [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataParseError(f"expected {len(header)} fields, got {len(row)}", path, line_no)

            def num(c, name):
                try:
                    v = float(row[c])
                except ValueError:
                    raise DataParseError(f"not a number: {row[c]!r}", path, line_no, name) from None
                if not np.isfinite(v):
                    raise DataParseError("non-finite value", path, line_no, name)
                return v

            if f_col is not None:
                f = num(f_col, "f_in_N")
                fname = "f_in_N"
            else:
                radius = num(radius_col, "pulley_radius_m")
                if radius <= 0:
                    raise DataParseError("pulley radius must be positive", path, line_no, "pulley_radius_m")
                f = num(torque_col, "actuator_torque_Nm") / radius
                fname = "actuator_torque_Nm"
            if f < 0:
                raise DataParseError(f"negative tendon force {f:g}", path, line_no, fname)
            forces.append(f)

            q = []
            for i in range(1, m + 1):
                c, name, unit = theta_cols[i]
                v = num(c, name)
                q.append(v if (radians or unit == "rad") else np.deg2rad(v))
            angles.append(q)
            ids.append(row[id_col].strip() if id_col is not None else str(len(ids)))
            if cycle_col is not None:
                cycles.append(int(num(cycle_col, "cycle")))

    if len(forces) < m:
        raise DataParseError(f"{len(forces)} samples, need at least {m}", path)
    return FlexionDataset(
        np.array(forces),
        np.array(angles),
        np.array(cycles) if cycle_col is not None else None,
        np.array(ids),
    )


def write_dataset(path, data: FlexionDataset):
    m = data.joint_count
    header = ["sample_id", "f_in_N"] + [f"theta{i}_deg" for i in range(1, m + 1)]
    if data.cycles is not None:
        header.append("cycle")
    rows = []
    for s in range(len(data)):
        row = [str(data.sample_ids[s]), float(data.forces[s]), *map(float, np.rad2deg(data.angles[s]))]
        if data.cycles is not None:
            row.append(int(data.cycles[s]))
        rows.append(row)
    write_csv(path, header, rows)

"""Command-line front end: ``tendonhand {simulate,calibrate,sweep,hand}``.

All commands write plot-ready CSV into ``--out``.  Exit codes: 0 success,
2 parse error, 3 validation error, 4 solver convergence failure, 5 I/O
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .calibration import fit_stiffness, format_error
from .equilibrium import DEFAULT_OPTIONS, force_ramp, tendon_excursion
from .errors import ConvergenceError, IdentifiabilityWarning, InvalidArgumentError, NumericalError
from .geometry import reference_geometry, scale_geometry
from .kernels import load_torques_batch
from .hand import aperture, assemble_hand, solve_hand, solve_hand_displacement
from .io import ConfigError, DataParseError, FingerConfig, load_config, open_csv_writer, read_dataset, write_csv

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5

DEFAULT_STIFFNESS = (28.48, 4.05, 4.05)
DEFAULT_KAPPAS = (0.5, 0.75, 1.0, 1.5, 1.75)
# finger lengths of the printed hands at those scales [mm]
PRINTED_FINGER_LENGTHS_MM = {0.5: 25.6, 0.75: 38.5, 1.0: 52.0, 1.5: 77.2, 1.75: 89.7}


def parse_ramp(text: str) -> np.ndarray:
    """``start:stop:step`` with the stop value included."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise InvalidArgumentError(f"ramp must be start:stop:step, got {text!r}") from None
    if not step > 0:
        raise InvalidArgumentError("ramp step must be positive")
    if stop < start:
        return np.empty(0)
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise InvalidArgumentError(f"expected comma-separated numbers, got {text!r}") from None


def parse_clamp(text: str, geom) -> tuple:
    """``finger:joint:angle_deg`` (1-based indices; angle may be ``rest``)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidArgumentError(f"clamp must be finger:joint:angle_deg, got {text!r}")
    try:
        finger, joint = int(parts[0]) - 1, int(parts[1]) - 1
    except ValueError:
        raise InvalidArgumentError(f"clamp indices must be integers, got {text!r}") from None
    if not 0 <= joint < geom.joint_count:
        raise InvalidArgumentError(f"clamp joint {joint + 1} outside 1..{geom.joint_count}")
    if parts[2].strip().lower() == "rest":
        angle = geom.rest_angles[joint]
    else:
        try:
            angle = float(np.deg2rad(float(parts[2])))
        except ValueError:
            raise InvalidArgumentError(f"clamp angle must be degrees or 'rest', got {parts[2]!r}") from None
    return finger, joint, angle


def _clamps_by_finger(specs, geom) -> dict:
    out = {}
    for spec in specs or ():
        finger, joint, angle = parse_clamp(spec, geom)
        out.setdefault(finger, []).append((joint, angle))
    return out


def _config(args) -> FingerConfig:
    if args.geometry:
        cfg = load_config(args.geometry)
    else:
        ref = reference_geometry(1.0)
        cfg = FingerConfig(unscaled=ref, scale=1.0)
    if args.scale is not None:
        cfg = FingerConfig(cfg.unscaled, args.scale, cfg.stiffness, cfg.fingers, cfg.base_radius, cfg.mount_angle)
    return cfg


def _stiffness(args, cfg: FingerConfig, fallback=DEFAULT_STIFFNESS) -> np.ndarray:
    m = cfg.unscaled.joint_count
    if args.stiffness:
        k = parse_floats(args.stiffness)
    elif cfg.stiffness is not None:
        k = cfg.stiffness
    elif fallback is not None and len(fallback) == m:
        k = np.array(fallback, dtype=float)
    else:
        raise InvalidArgumentError(f"--stiffness is required for a {m}-joint finger")
    if k.size != m or np.any(k <= 0):
        raise InvalidArgumentError(f"need {m} positive stiffness values, got {args.stiffness or k}")
    return k


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _config(args)
    geom = cfg.geometry
    k = _stiffness(args, cfg)
    schedule = parse_ramp(args.ramp)
    if schedule.size == 0:
        raise InvalidArgumentError(f"ramp {args.ramp!r} is empty")
    clamps = _clamps_by_finger(args.clamp, geom).get(0)
    rng = np.random.default_rng(args.seed)
    noise = np.deg2rad(args.noise_deg)

    m = geom.joint_count
    header = ["f_in_N"] + [f"theta{i}_deg" for i in range(1, m + 1)] + ["excursion_mm"]
    path = _outdir(args) / "simulate.csv"
    fh, write = open_csv_writer(path, header)

    def on_step(idx, f, res):
        theta = res.theta + (rng.normal(0.0, noise, m) if noise > 0 else 0.0)
        write([float(f), *map(float, np.rad2deg(theta)), float(tendon_excursion(geom, res.theta) * 1e3)])

    try:
        force_ramp(geom, k, schedule, DEFAULT_OPTIONS, clamps, on_step=on_step)
    except (ConvergenceError, NumericalError) as exc:
        raise type(exc)(f"ramp index {exc.index} (f_in={schedule[exc.index]:g} N): {exc}") from exc
    finally:
        fh.close()
    print(f"wrote {path} ({schedule.size} rows)")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _config(args)
    geom = cfg.geometry
    data = read_dataset(args.data, radians=args.radians)
    if data.joint_count != geom.joint_count:
        raise InvalidArgumentError(f"dataset has {data.joint_count} angle columns, geometry has {geom.joint_count} joints")
    k_init = _stiffness(args, cfg, fallback=(1.0,) * geom.joint_count)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IdentifiabilityWarning)
        fit = fit_stiffness(data, geom, k_init, min_tension=args.min_tension)
    pred = fit.prediction

    report = {
        "stiffness_Nm_per_rad": [float(v) for v in fit.stiffness],
        "objective": fit.objective,
        "initial_objective": fit.initial_objective,
        "iterations": fit.iterations,
        "gradient_norm": fit.gradient_norm,
        "error_mean_deg": pred.mean_deg,
        "error_std_deg": pred.std_deg,
        "error": format_error(pred.mean_deg, pred.std_deg),
        "prediction_failures": pred.failures,
        "excluded_samples": fit.excluded,
        "curvature": [float(v) for v in fit.curvature],
        "warning": fit.warning,
    }
    out = _outdir(args)
    with open(out / "fit_report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    m = geom.joint_count
    lengths, along, lateral, rest = geom.arrays()
    rho = load_torques_batch(data.forces, data.angles, lengths, along, lateral, rest) - fit.stiffness * (data.angles - rest)
    header = (
        ["sample_id", "f_in_N"]
        + [f"rho{i}_Nm" for i in range(1, m + 1)]
        + [f"pred{i}_deg" for i in range(1, m + 1)]
        + [f"err{i}_deg" for i in range(1, m + 1)]
    )
    rows = [
        [str(data.sample_ids[s]), float(data.forces[s]), *map(float, rho[s]), *map(float, np.rad2deg(pred.predicted[s])), *map(float, pred.errors_deg[s])]
        for s in range(len(data))
    ]
    write_csv(out / "fit_residuals.csv", header, rows)

    print("k* = " + ", ".join(f"{v:.6g}" for v in fit.stiffness) + " N m/rad")
    print(f"objective = {fit.objective:.6g} (from {fit.initial_objective:.6g}), iterations = {fit.iterations}")
    print(f"angle error = {report['error']}")
    if fit.warning:
        print(f"warning: {fit.warning}", file=sys.stderr)
    return EXIT_OK


def _sweep_row(cfg, k, kappa, tensions):
    geom = scale_geometry(cfg.unscaled, kappa)
    ref_length = cfg.unscaled.reference_length or cfg.unscaled.finger_length
    length_mm = ref_length * kappa * 1e3
    printed = PRINTED_FINGER_LENGTHS_MM.get(round(kappa, 6))
    row = [kappa, length_mm, "" if printed is None else printed, "" if printed is None else 100.0 * (printed - length_mm) / length_mm]
    hand = assemble_hand(geom, k, 2, cfg.layout(kappa))
    for f in tensions:
        theta = force_ramp(geom, k, [0.0, f] if f > 0 else [0.0]).thetas[-1]
        cov = force_ramp(geom, k * kappa, [0.0, f] if f > 0 else [0.0]).thetas[-1]
        state = solve_hand(hand, 2.0 * f)
        row += [*map(float, np.rad2deg(theta)), *map(float, np.rad2deg(cov)), aperture(hand, state) * 1e3]
    return row


def cmd_sweep(args) -> int:
    cfg = _config(args)
    k = _stiffness(args, cfg)
    kappas = parse_floats(args.kappa) if args.kappa else np.array(DEFAULT_KAPPAS)
    if kappas.size == 0 or np.any(kappas <= 0):
        raise InvalidArgumentError("kappa list must be non-empty and positive")
    tensions = parse_floats(args.tensions)
    if tensions.size == 0 or np.any(tensions < 0):
        raise InvalidArgumentError("tension list must be non-empty and non-negative")

    m = cfg.unscaled.joint_count
    header = ["kappa", "finger_length_mm", "printed_length_mm", "printed_deviation_pct"]
    for f in tensions:
        tag = f"{f:g}N"
        header += [f"theta{i}_deg_at_{tag}" for i in range(1, m + 1)]
        header += [f"cov_theta{i}_deg_at_{tag}" for i in range(1, m + 1)]
        header += [f"aperture_mm_at_{tag}"]

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda kap: _sweep_row(cfg, k, float(kap), tensions), kappas))
    path = _outdir(args) / "sweep.csv"
    write_csv(path, header, rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_hand(args) -> int:
    cfg = _config(args)
    geom = cfg.geometry
    k = _stiffness(args, cfg)
    n = args.fingers or cfg.fingers
    hand = assemble_hand(geom, k, n, cfg.layout())
    schedule = parse_ramp(args.ramp)
    if schedule.size == 0:
        raise InvalidArgumentError(f"ramp {args.ramp!r} is empty")
    clamps = _clamps_by_finger(args.clamp, geom)

    m = geom.joint_count
    header = ["actuator_force_N", "pull_mm", "aperture_mm"]
    for f in range(1, n + 1):
        header += [f"tension{f}_N"] + [f"f{f}_theta{i}_deg" for i in range(1, m + 1)] + [f"excursion{f}_mm"]
    path = _outdir(args) / "hand.csv"
    fh, write = open_csv_writer(path, header)
    try:
        prev = None
        for idx, value in enumerate(schedule):
            try:
                if args.control == "force":
                    state = solve_hand(hand, value, clamps, theta_init=prev)
                else:
                    state = solve_hand_displacement(hand, value * 1e-3, clamps)
            except (ConvergenceError, NumericalError) as exc:
                raise type(exc)(f"ramp index {idx}, finger {exc.index}: {exc}") from exc
            prev = state.thetas
            row = [state.actuator_force, state.pull_displacement * 1e3, aperture(hand, state) * 1e3]
            for f in range(n):
                row += [float(state.tensions[f]), *map(float, np.rad2deg(state.thetas[f])), float(state.excursions[f] * 1e3)]
            write(row)
    finally:
        fh.close()
    print(f"wrote {path} ({schedule.size} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--geometry", help="finger config file (INI)")
    common.add_argument("--scale", type=float, help="override the config scale factor kappa")
    common.add_argument("--stiffness", help="k1,k2,... in N m/rad")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="tendonhand", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="single-finger flexion along a tension ramp")
    p.add_argument("--ramp", default="0:75:1", help="tension schedule start:stop:step [N]")
    p.add_argument("--clamp", action="append", help="1:joint:angle_deg (finger index must be 1)")
    p.add_argument("--noise-deg", type=float, default=0.0, help="Gaussian angle noise added to the output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", parents=[common], help="fit joint stiffnesses to a flexion dataset")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--radians", action="store_true", help="angle columns are in radians")
    p.add_argument("--min-tension", type=float, default=0.0, help="drop samples below this tension [N]")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sweep", parents=[common], help="compare scaled fingers and hands")
    p.add_argument("--kappa", help="comma-separated scale factors")
    p.add_argument("--tensions", default="20,75", help="reference band tensions [N]")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hand", parents=[common], help="multi-finger hand closing through the differential")
    p.add_argument("--fingers", type=int)
    p.add_argument("--ramp", default="0:80:5", help="actuator force [N] or pull travel [mm], start:stop:step")
    p.add_argument("--control", choices=("force", "displacement"), default="force")
    p.add_argument("--clamp", action="append", help="finger:joint:angle_deg, 1-based, angle may be 'rest'")
    p.set_defaults(func=cmd_hand)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataParseError, ConfigError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidArgumentError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, NumericalError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

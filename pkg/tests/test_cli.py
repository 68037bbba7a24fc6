import csv
import json

import numpy as np
import pytest

from conftest import NOMINAL_K
from tendonhand.cli import EXIT_CONVERGENCE, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, main, parse_clamp, parse_ramp
from tendonhand.errors import InvalidArgumentError
from tendonhand.geometry import reference_geometry

NOMINAL = ["--scale", "1.5", "--stiffness", "28.48,4.05,4.05"]


def read(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) if v else np.nan for v in r] for r in rows[1:]])


def test_parse_ramp():
    np.testing.assert_allclose(parse_ramp("0:75:1"), np.arange(76.0))
    np.testing.assert_allclose(parse_ramp("0:1:0.1")[-1], 1.0)
    assert parse_ramp("5:0:1").size == 0
    with pytest.raises(InvalidArgumentError):
        parse_ramp("0:10")
    with pytest.raises(InvalidArgumentError):
        parse_ramp("0:10:0")


def test_parse_clamp():
    g = reference_geometry()
    assert parse_clamp("1:1:rest", g) == (0, 0, g.rest_angles[0])
    assert parse_clamp("2:3:30", g) == (1, 2, pytest.approx(np.deg2rad(30)))
    for bad in ("1:4:0", "1:x:0", "1:1", "1:1:abc"):
        with pytest.raises(InvalidArgumentError):
            parse_clamp(bad, g)


def test_simulate_reference_ramp(tmp_path):
    assert main(["simulate", *NOMINAL, "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read(tmp_path / "simulate.csv")
    assert header == ["f_in_N", "theta1_deg", "theta2_deg", "theta3_deg", "excursion_mm"]
    assert rows.shape == (76, 5)
    np.testing.assert_allclose(rows[0, 1:4], [50, 0, 0], atol=1e-12)
    assert np.all(np.diff(rows[:, 1:4], axis=0) >= 0)


def test_simulate_empty_ramp_writes_nothing(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--ramp", "10:0:1", "--out", str(out)]) == EXIT_VALIDATION
    assert not (out / "simulate.csv").exists()


def test_simulate_deterministic(tmp_path):
    args = ["simulate", *NOMINAL, "--noise-deg", "1", "--seed", "9"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a/simulate.csv").read_bytes() == (tmp_path / "b/simulate.csv").read_bytes()


def test_simulate_convergence_exit_code(tmp_path, monkeypatch):
    from tendonhand import cli
    from tendonhand.equilibrium import SolverOptions

    monkeypatch.setattr(cli, "DEFAULT_OPTIONS", SolverOptions(max_iter=1, tol=1e-300))
    assert main(["simulate", *NOMINAL, "--ramp", "0:5:1", "--out", str(tmp_path)]) == EXIT_CONVERGENCE
    _, rows = read(tmp_path / "simulate.csv")
    assert rows.shape[0] == 1  # rows before the failing step are flushed


def test_simulate_calibrate_round_trip(tmp_path):
    main(["simulate", *NOMINAL, "--out", str(tmp_path)])
    assert main(["calibrate", "--scale", "1.5", "--data", str(tmp_path / "simulate.csv"), "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "fit_report.json").read_text(encoding="utf-8"))
    np.testing.assert_allclose(report["stiffness_Nm_per_rad"], NOMINAL_K, rtol=1e-3)
    assert "±" in report["error"]
    header, rows = read(tmp_path / "fit_residuals.csv")
    assert rows.shape[0] == 76


def test_calibrate_parse_error(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("f_in_N,theta1_deg,theta2_deg,theta3_deg\n1,50,0,0\n-1,51,0,0\n2,52,0,0\n", encoding="utf-8")
    assert main(["calibrate", "--data", str(data), "--out", str(tmp_path)]) == EXIT_PARSE


def test_calibrate_radians_flag(tmp_path):
    main(["simulate", *NOMINAL, "--ramp", "0:75:5", "--out", str(tmp_path)])
    header, rows = read(tmp_path / "simulate.csv")
    rad = tmp_path / "rad.csv"
    with open(rad, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header[:4])
        for r in rows:
            w.writerow([repr(float(r[0])), *(repr(float(v)) for v in np.deg2rad(r[1:4]))])
    assert main(["calibrate", "--scale", "1.5", "--radians", "--data", str(rad), "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "fit_report.json").read_text(encoding="utf-8"))
    np.testing.assert_allclose(report["stiffness_Nm_per_rad"], NOMINAL_K, rtol=1e-3)


def test_calibrate_missing_file(tmp_path):
    assert main(["calibrate", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 5


def test_sweep(tmp_path):
    assert main(["sweep", "--stiffness", "28.48,4.05,4.05", "--jobs", "3", "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read(tmp_path / "sweep.csv")
    np.testing.assert_allclose(rows[:, 1], [26, 39, 52, 78, 91], rtol=1e-12)
    assert np.all(np.abs(rows[:, 3]) <= 2.0)
    t = header.index("theta1_deg_at_20N")
    c = header.index("cov_theta1_deg_at_20N")
    for row in rows:
        np.testing.assert_allclose(row[c : c + 3], rows[2, t : t + 3], atol=1e-9)

    main(["simulate", "--stiffness", "28.48,4.05,4.05", "--ramp", "0:20:1", "--out", str(tmp_path)])
    _, sim = read(tmp_path / "simulate.csv")
    np.testing.assert_allclose(rows[2, t : t + 3], sim[-1, 1:4], atol=1e-9)


def test_hand_symmetric(tmp_path):
    assert main(["hand", *NOMINAL, "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read(tmp_path / "hand.csv")
    for i in range(1, 4):
        np.testing.assert_array_equal(rows[:, header.index(f"f1_theta{i}_deg")], rows[:, header.index(f"f2_theta{i}_deg")])
    tensions = rows[:, header.index("tension1_N")] + rows[:, header.index("tension2_N")]
    np.testing.assert_array_equal(tensions, rows[:, 0])
    assert np.all(np.diff(rows[:, header.index("aperture_mm")]) <= 0)


def test_hand_clamp_displacement_control(tmp_path):
    common = ["hand", *NOMINAL, "--control", "displacement", "--ramp", "1:3:0.5"]
    main(common + ["--out", str(tmp_path / "free")])
    clamps = [a for j in (1, 2, 3) for a in ("--clamp", f"1:{j}:rest")]
    assert main(common + clamps + ["--out", str(tmp_path / "held")]) == EXIT_OK
    header, free = read(tmp_path / "free/hand.csv")
    _, held = read(tmp_path / "held/hand.csv")
    for i in range(1, 4):
        col = header.index(f"f2_theta{i}_deg")
        assert np.all(held[:, col] > free[:, col])
    col = header.index("excursion2_mm")
    assert np.all(held[:, col] > free[:, col])
    np.testing.assert_allclose(held[:, 1], free[:, 1], rtol=1e-9)


def test_hand_bad_finger_count(tmp_path):
    assert main(["hand", "--fingers", "1", "--out", str(tmp_path)]) == EXIT_VALIDATION

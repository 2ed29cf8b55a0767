import json

import numpy as np

from padvio import cli
from padvio.dataset_io import read_dataset, write_dataset
from padvio.graph import PoseState, WindowState
from padvio.imu import ImuSample, WorldParams
from padvio.sim import CameraModel, Dataset
from padvio.vision import PixelMeasurement


def _write_config(tmp_path, **overrides):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(overrides))
    return str(path)


def _read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def test_simulate_default_config_counts(tmp_path, capsys):
    assert cli.main(["simulate", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "7 keyframes, 120 imu samples, 42 measurements" in out
    dataset = read_dataset(tmp_path / "dataset.txt")
    assert dataset.ground_truth.n == 7
    assert len(dataset.imu_samples) == 120
    assert 2 * len(dataset.pixel_measurements) == 42


def test_simulate_minimal_window(tmp_path):
    cfg = _write_config(tmp_path, window_length=2)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    dataset = read_dataset(tmp_path / "dataset.txt")
    assert dataset.ground_truth.n == 2
    assert len(dataset.imu_samples) == 20


def test_simulate_same_seed_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert cli.main(["simulate", "--seed", "11", "--out", str(tmp_path / sub)]) == 0
    a = (tmp_path / "a" / "dataset.txt").read_bytes()
    b = (tmp_path / "b" / "dataset.txt").read_bytes()
    assert a == b
    assert cli.main(["simulate", "--seed", "12", "--out", str(tmp_path / "c")]) == 0
    assert a != (tmp_path / "c" / "dataset.txt").read_bytes()


def test_simulate_warns_below_landmark_minimum(tmp_path, capsys):
    cfg = _write_config(tmp_path, window_length=2, landmarks=[[0.5, 0.0, 0.0]])
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert "below the necessary minimum" in capsys.readouterr().err


def test_unknown_config_field_exits_1(tmp_path, capsys):
    cfg = _write_config(tmp_path, window_size=7)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "window_size" in capsys.readouterr().err


def test_invalid_config_value_exits_1(tmp_path, capsys):
    cfg = _write_config(tmp_path, damping=-0.5)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "damping" in capsys.readouterr().err


def test_missing_dataset_exits_1(tmp_path, capsys):
    assert cli.main(["estimate", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == 1
    assert "dataset" in capsys.readouterr().err


def test_estimate_writes_reports(tmp_path):
    out = str(tmp_path)
    assert cli.main(["simulate", "--out", out]) == 0
    assert cli.main(["estimate", str(tmp_path / "dataset.txt"), "--out", out]) == 0
    header, rows = _read_csv(tmp_path / "convergence.csv")
    assert header == ["iteration", "cost", "step_norm"]
    assert len(rows) == 50
    assert float(rows[-1][1]) <= 0.01 * float(rows[0][1])

    header, rows = _read_csv(tmp_path / "pose_errors.csv")
    assert header == ["frame", "dx", "dy", "dz", "rot_angle_error_rad"]
    assert len(rows) == 7
    assert rows[0] == ["1", "0.0", "0.0", "0.0", "0.0"]  # fixed prior

    header, rows = _read_csv(tmp_path / "landmark_errors.csv")
    assert header == ["id", "dx", "dy", "dz"]
    assert [r[3] for r in rows] == ["0.0", "0.0", "0.0"]  # constrained altitudes

    header, rows = _read_csv(tmp_path / "summary.csv")
    assert header[:5] == ["keyframes", "landmarks", "imu_samples", "measurements", "iterations"]
    assert rows[0][:5] == ["7", "3", "120", "42", "50"]
    assert float(rows[0][7]) > 0.0  # wall clock


def test_estimate_truth_init_noise_free_has_zero_errors(tmp_path):
    cfg = _write_config(tmp_path, imu_noise_variance=0.0, pixel_noise_variance=0.0, init="truth")
    out = str(tmp_path)
    assert cli.main(["simulate", "--config", cfg, "--out", out]) == 0
    assert cli.main(["estimate", str(tmp_path / "dataset.txt"), "--config", cfg, "--out", out]) == 0
    _, rows = _read_csv(tmp_path / "pose_errors.csv")
    for row in rows:
        assert all(abs(float(x)) < 1e-9 for x in row[1:])
    _, rows = _read_csv(tmp_path / "landmark_errors.csv")
    for row in rows:
        assert all(abs(float(x)) < 1e-9 for x in row[1:])


def test_estimate_no_constraint_frees_altitudes(tmp_path):
    out = str(tmp_path)
    assert cli.main(["simulate", "--out", out]) == 0
    assert cli.main(
        ["estimate", str(tmp_path / "dataset.txt"), "--out", out, "--no-constraint"]
    ) == 0
    _, rows = _read_csv(tmp_path / "landmark_errors.csv")
    assert any(r[3] != "0.0" for r in rows)


def test_estimate_flag_overrides(tmp_path):
    out = str(tmp_path)
    assert cli.main(["simulate", "--out", out]) == 0
    assert cli.main(
        ["estimate", str(tmp_path / "dataset.txt"), "--out", out, "--iterations", "7", "--damping", "0.2"]
    ) == 0
    _, rows = _read_csv(tmp_path / "convergence.csv")
    assert len(rows) == 7


def test_estimate_solver_failure_exits_2_with_partial_file(tmp_path, capsys):
    # camera center on the ground plane: the only landmark projects at depth 0
    poses = [PoseState(np.eye(3), np.zeros(3), np.zeros(3)) for _ in range(2)]
    dataset = Dataset(
        ground_truth=WindowState(poses, np.array([[1.0, 0.0, 0.0]])),
        imu_samples=[ImuSample(np.zeros(3), np.zeros(3), 0.02) for _ in range(20)],
        pixel_measurements=[PixelMeasurement(1, 1, np.zeros(2))],
        cam=CameraModel(1.0),
        world=WorldParams(np.zeros(3)),
        imu_dt=0.02,
        camera_dt=0.4,
    )
    path = tmp_path / "degenerate.txt"
    write_dataset(dataset, path)
    cfg = _write_config(tmp_path, init="truth")
    assert cli.main(["estimate", str(path), "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "iteration 1" in err and "landmark 1" in err
    header, rows = _read_csv(tmp_path / "convergence.csv")
    assert header == ["iteration", "cost", "step_norm"]
    assert rows == []  # aborted before the first cost was recorded


def test_check_jacobians_passes(capsys):
    assert cli.main(["check-jacobians", "--trials", "5", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "velocity block identically zero: yes" in out
    assert "PASS" in out


def test_check_jacobians_corrupt_hook_fails(capsys):
    assert cli.main(["check-jacobians", "--trials", "3", "--corrupt"]) == 3
    assert "FAIL" in capsys.readouterr().out

import numpy as np
import pytest

from padvio.dataset_io import DatasetFormatError, dumps, loads, read_dataset, write_dataset
from padvio.imu import WorldParams
from padvio.sim import CameraModel, NoiseSpec, Profile, TrajectorySpec, generate, triangle_landmarks


def _dataset(seed=0):
    spec = TrajectorySpec(
        duration=1.2,
        angular_profile=Profile("constant", {"value": [0.03, -0.02, 0.08]}),
        accel_profile=Profile("constant", {"value": [0.2, 0.1, -9.6]}),
    )
    return generate(
        spec, triangle_landmarks(), CameraModel(1.0), WorldParams(), NoiseSpec(seed=seed)
    )


def test_round_trip_is_exact():
    original = _dataset()
    restored = loads(dumps(original))
    assert restored.imu_dt == original.imu_dt
    assert restored.camera_dt == original.camera_dt
    assert restored.cam.focal == original.cam.focal
    np.testing.assert_array_equal(restored.world.gravity, original.world.gravity)
    np.testing.assert_array_equal(restored.ground_truth.landmarks, original.ground_truth.landmarks)
    for a, b in zip(restored.ground_truth.poses, original.ground_truth.poses):
        np.testing.assert_array_equal(a.R, b.R)
        np.testing.assert_array_equal(a.v, b.v)
        np.testing.assert_array_equal(a.p, b.p)
    for a, b in zip(restored.imu_samples, original.imu_samples):
        np.testing.assert_array_equal(a.omega, b.omega)
        np.testing.assert_array_equal(a.accel, b.accel)
        assert a.dt == b.dt
    for a, b in zip(restored.pixel_measurements, original.pixel_measurements):
        assert (a.frame_index, a.landmark_id) == (b.frame_index, b.landmark_id)
        np.testing.assert_array_equal(a.uv, b.uv)


def test_file_round_trip(tmp_path):
    original = _dataset()
    path = tmp_path / "dataset.txt"
    write_dataset(original, path)
    restored = read_dataset(path)
    assert len(restored.imu_samples) == len(original.imu_samples)
    assert dumps(restored) == dumps(original)


def test_same_seed_serializes_byte_identical():
    assert dumps(_dataset(seed=4)) == dumps(_dataset(seed=4))
    assert dumps(_dataset(seed=4)) != dumps(_dataset(seed=5))


def test_rejects_unknown_version():
    text = dumps(_dataset()).replace("padvio-dataset v1", "padvio-dataset v9", 1)
    with pytest.raises(DatasetFormatError, match="version"):
        loads(text)


def test_rejects_wrong_magic():
    with pytest.raises(DatasetFormatError):
        loads("padvio-report v1\n")


def test_rejects_truncated_file():
    text = dumps(_dataset())
    truncated = "\n".join(text.splitlines()[:10])
    with pytest.raises(DatasetFormatError):
        loads(truncated)


def test_rejects_malformed_numbers():
    text = dumps(_dataset()).replace("camera focal 1.0", "camera focal one", 1)
    with pytest.raises(DatasetFormatError, match="malformed"):
        loads(text)

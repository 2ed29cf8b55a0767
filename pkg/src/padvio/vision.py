"""Pinhole projection of landmarks and the 2-vector photometric residual.

The camera frame coincides with the body frame: a landmark at world position
p_l seen from pose (R, p) sits at q = R^T (p_l - p) in front of the camera,
and projects to (f x/z + cx, f y/z + cy).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifold import hat

# Predicted depths at or below this magnitude are degenerate.
DEPTH_EPSILON = 1e-6


class DegenerateDepthError(RuntimeError):
    """Projection attempted at |z| <= DEPTH_EPSILON (behind or on the camera plane)."""

    def __init__(self, depth: float, frame_index: int | None = None, landmark_id: int | None = None):
        self.depth = depth
        self.frame_index = frame_index
        self.landmark_id = landmark_id
        where = ""
        if frame_index is not None or landmark_id is not None:
            where = f" (frame {frame_index}, landmark {landmark_id})"
        super().__init__(f"degenerate projection depth z={depth:.3e}{where}")


@dataclass
class CameraModel:
    focal: float  # pixels
    principal_point: np.ndarray = field(default_factory=lambda: np.zeros(2))


@dataclass
class PixelMeasurement:
    """One detected landmark in one keyframe's image. Indices are 1-based."""

    frame_index: int
    landmark_id: int
    uv: np.ndarray  # pixels


def landmark_in_body(pose, landmark: np.ndarray) -> np.ndarray:
    """Landmark position in the observing body/camera frame: R^T (p_l - p)."""
    return pose.R.T @ (np.asarray(landmark, dtype=float) - pose.p)


def project(cam: CameraModel, pt: np.ndarray) -> np.ndarray:
    """Pinhole projection of a camera-frame point to pixel coordinates."""
    x, y, z = pt
    if abs(z) <= DEPTH_EPSILON:
        raise DegenerateDepthError(z)
    return np.asarray(cam.principal_point, dtype=float) + cam.focal * np.array([x / z, y / z])


def photometric_residual(cam: CameraModel, pose, landmark: np.ndarray, meas: PixelMeasurement) -> np.ndarray:
    """Predicted minus measured pixel coordinates."""
    return project(cam, landmark_in_body(pose, landmark)) - np.asarray(meas.uv, dtype=float)


def projection_differential(cam: CameraModel, pt: np.ndarray) -> np.ndarray:
    """2x3 derivative of the pinhole projection at a camera-frame point."""
    x, y, z = pt
    if abs(z) <= DEPTH_EPSILON:
        raise DegenerateDepthError(z)
    return (cam.focal / (z * z)) * np.array([[z, 0.0, -x], [0.0, z, -y]])


def photometric_jacobian(cam: CameraModel, pose, landmark: np.ndarray) -> np.ndarray:
    """2x12 Jacobian of the photometric residual.

    Column blocks are [dR, dv, dp, dp_l]. The camera-frame point obeys
    q(dR) = Exp(-dR) R^T (p_l - p) to first order, so the inner 3x12 Jacobian
    is [hat(q), 0, -I, R^T]; the projection differential chains on top.
    Velocity never enters the projection, so its block is identically zero.
    """
    q = landmark_in_body(pose, landmark)
    P = projection_differential(cam, q)
    J = np.zeros((2, 12))
    J[:, 0:3] = P @ hat(q)
    J[:, 6:9] = -P
    J[:, 9:12] = P @ pose.R.T
    return J

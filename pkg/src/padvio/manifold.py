"""SO(3) primitives: hat/vee maps and the exponential/logarithm pair.

Rotations are plain 3x3 numpy arrays (direction cosine matrices, body to
world). Tangent vectors are 3-vectors in radians (axis times angle).
"""

from __future__ import annotations

import numpy as np

# Below this angle the Rodrigues coefficients switch to their Taylor series.
SMALL_ANGLE = 1e-8

# log_map rejects rotations whose angle is within this margin of pi, where
# the (R - R^T) / (2 sin phi) formula degenerates.
PI_MARGIN = 1e-6


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector, so that hat(a) @ b == cross(a, b)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(S: np.ndarray) -> np.ndarray:
    """Inverse of hat. Rejects input that is not skew-symmetric."""
    S = np.asarray(S, dtype=float)
    if np.abs(S + S.T).max() >= 1e-9:
        raise ValueError("vee: input matrix is not skew-symmetric")
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def exp_map(phi: np.ndarray) -> np.ndarray:
    """Rodrigues formula, rotation vector to rotation matrix."""
    phi = np.asarray(phi, dtype=float)
    angle = float(np.linalg.norm(phi))
    S = hat(phi)
    if angle < SMALL_ANGLE:
        # second-order Taylor of sin(a)/a and (1 - cos a)/a^2
        a = 1.0 - angle * angle / 6.0
        b = 0.5 - angle * angle / 24.0
    else:
        a = np.sin(angle) / angle
        b = (1.0 - np.cos(angle)) / (angle * angle)
    return np.eye(3) + a * S + b * (S @ S)


def log_map(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to rotation vector.

    The angle comes from arccos((trace - 1)/2); inputs with angle within
    PI_MARGIN of pi are rejected rather than special-cased, since
    keyframe-to-keyframe rotations in this problem are small.
    """
    R = np.asarray(R, dtype=float)
    c = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(c))
    if angle >= np.pi - PI_MARGIN:
        raise ValueError(
            f"log_map: rotation angle {angle:.9f} rad is within {PI_MARGIN:g} of pi"
        )
    # half the vee of (R - R^T) equals sin(angle) * axis
    u = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if angle < SMALL_ANGLE:
        return u * (1.0 + angle * angle / 6.0)
    return u * (angle / np.sin(angle))


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    """True if R is orthonormal with determinant +1 to the given tolerance."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.isfinite(R).all():
        return False
    if np.abs(R.T @ R - np.eye(3)).max() >= tol:
        return False
    return abs(np.linalg.det(R) - 1.0) <= tol

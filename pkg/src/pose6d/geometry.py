"""Rigid-body math, pinhole camera model, object models, and point clouds."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

# Orthonormality acceptance for externally supplied rotation matrices.
# Corrupt matrices are rejected, never silently re-orthonormalized.
ROTATION_ATOL = 1e-4


class EmptyCloudError(ValueError):
    """No valid pixels were available to build a point cloud."""


def normalize_quat(q) -> np.ndarray:
    """Return q / ||q|| as a float64 (w, x, y, z) array."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (4,):
        raise ValueError(f"quaternion must have 4 components, got shape {q.shape}")
    norm = float(np.linalg.norm(q))
    if not np.isfinite(norm) or norm <= 1e-12:
        raise ValueError("degenerate quaternion: norm is zero or non-finite")
    return q / norm


def quat_mul(a, b) -> np.ndarray:
    """Hamilton product a * b for (w, x, y, z) quaternions."""
    aw, ax, ay, az = np.asarray(a, dtype=np.float64)
    bw, bx, by, bz = np.asarray(b, dtype=np.float64)
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=np.float64)
    return np.array([w, -x, -y, -z])


def quat_to_matrix(q) -> np.ndarray:
    """Convert quaternion (w, x, y, z) to a 3x3 rotation matrix.

    The quaternion is normalized internally; q and -q map to the same
    matrix. Raises ValueError for a near-zero-norm quaternion.
    """
    w, x, y, z = normalize_quat(q)
    return np.array([
        [1 - 2 * y * y - 2 * z * z, 2 * x * y - 2 * w * z, 2 * x * z + 2 * w * y],
        [2 * x * y + 2 * w * z, 1 - 2 * x * x - 2 * z * z, 2 * y * z - 2 * w * x],
        [2 * x * z - 2 * w * y, 2 * y * z + 2 * w * x, 1 - 2 * x * x - 2 * y * y],
    ])


def check_rotation(R, atol: float = ROTATION_ATOL) -> np.ndarray:
    """Validate that R is a proper rotation matrix; returns it as float64."""
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        raise ValueError(f"rotation matrix must be 3x3, got shape {R.shape}")
    err = float(np.linalg.norm(R.T @ R - np.eye(3)))
    if not np.isfinite(err) or err > atol:
        raise ValueError(f"matrix is not orthonormal (||R'R - I||_F = {err:.3g})")
    if np.linalg.det(R) < 0:
        raise ValueError("matrix is a reflection (det < 0), not a rotation")
    return R


def matrix_to_quat(R) -> np.ndarray:
    """Convert a 3x3 rotation matrix to quaternion (w, x, y, z).

    Branches on the largest diagonal element for numerical stability.
    Input must be orthonormal within ROTATION_ATOL.
    """
    R = check_rotation(R)
    trace = R[0, 0] + R[1, 1] + R[2, 2]
    if trace > 0:
        s = 0.5 / np.sqrt(trace + 1.0)
        w = 0.25 / s
        x = (R[2, 1] - R[1, 2]) * s
        y = (R[0, 2] - R[2, 0]) * s
        z = (R[1, 0] - R[0, 1]) * s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    return normalize_quat(np.array([w, x, y, z]))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation quaternion (w, x, y, z) + translation in meters."""

    quat: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "quat", normalize_quat(self.quat))
        t = np.asarray(self.trans, dtype=np.float64)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise ValueError("translation must be a finite 3-vector")
        object.__setattr__(self, "trans", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))

    @classmethod
    def from_matrix(cls, R, t) -> "Pose":
        return cls(matrix_to_quat(R), t)

    @property
    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.quat)

    def compose(self, other: "Pose") -> "Pose":
        """self after other: (self @ other)(x) = self(other(x))."""
        return Pose(quat_mul(self.quat, other.quat),
                    self.matrix @ other.trans + self.trans)

    def inverse(self) -> "Pose":
        return Pose(quat_conjugate(self.quat), -(self.matrix.T @ self.trans))


def transform_points(pose: Pose, pts) -> np.ndarray:
    """Apply pose to an N x 3 point array: each row maps to R @ x + t."""
    pts = np.asarray(pts, dtype=np.float64)
    return pts @ pose.matrix.T + pose.trans


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    depth_scale: float = 1.0  # meters per stored depth unit

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.depth_scale <= 0:
            raise ValueError("depth_scale must be positive")

    def shifted(self, row0: int, col0: int) -> "CameraIntrinsics":
        """Intrinsics valid for a crop whose top-left source pixel is (row0, col0)."""
        return replace(self, cx=self.cx - col0, cy=self.cy - row0)


@dataclass
class PointCloud:
    """N x 3 points in meters, optionally with aligned per-point rows."""

    points: np.ndarray
    features: np.ndarray | None = None
    pixel_indices: np.ndarray | None = None  # (N, 2) source (row, col)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 3 or len(self.points) < 1:
            raise EmptyCloudError("point cloud must be a nonempty N x 3 array")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)


def depth_to_pointcloud(depth, intr: CameraIntrinsics, mask=None) -> PointCloud:
    """Back-project a depth image into a camera-frame point cloud.

    Selects pixels with depth > 0 (and inside ``mask`` when given), in
    row-major scan order. Each pixel (row v, col u, depth d) maps to
    ((u - cx) * d * s / fx, (v - cy) * d * s / fy, d * s) with
    s = depth_scale. Raises EmptyCloudError when nothing is selected.
    """
    depth = np.asarray(depth)
    if depth.ndim != 2:
        raise ValueError("depth image must be 2-D")
    if np.any(depth < 0):
        raise ValueError("depth image must be nonnegative")
    select = depth > 0
    if mask is not None:
        mask = np.asarray(mask)
        if mask.shape != depth.shape:
            raise ValueError("mask shape must match depth shape")
        select &= mask.astype(bool)
    rows, cols = np.nonzero(select)
    if len(rows) == 0:
        raise EmptyCloudError("no pixels with positive depth selected")
    z = depth[rows, cols].astype(np.float64) * intr.depth_scale
    x = (cols.astype(np.float64) - intr.cx) * z / intr.fx
    y = (rows.astype(np.float64) - intr.cy) * z / intr.fy
    points = np.stack([x, y, z], axis=1)
    return PointCloud(points, pixel_indices=np.stack([rows, cols], axis=1))


def compute_diameter(points) -> float:
    """Maximum pairwise distance of a point set."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("need at least 2 points to compute a diameter")
    return float(pdist(pts).max())


@dataclass(frozen=True)
class ObjectModel:
    """3D model point set with the metadata the metrics need."""

    class_id: int
    points: np.ndarray  # (m, 3) in the object frame, meters
    diameter: float
    symmetric: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise ValueError("model must have at least 2 points of dimension 3")
        if not np.all(np.isfinite(pts)):
            raise ValueError("model points must be finite")
        object.__setattr__(self, "points", pts)
        actual = compute_diameter(pts)
        if self.diameter <= 0 or abs(self.diameter - actual) > 1e-6:
            raise ValueError(
                f"stated diameter {self.diameter} does not match point set "
                f"(max pairwise distance {actual})")

    @classmethod
    def from_points(cls, class_id: int, points, symmetric: bool = False) -> "ObjectModel":
        return cls(class_id, points, compute_diameter(points), symmetric)

    @property
    def num_points(self) -> int:
        return len(self.points)


def sample_model_points(model: ObjectModel, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` model points, deterministically for a fixed seed.

    Sampling is without replacement when count <= m and with replacement
    otherwise.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    m = model.num_points
    idx = rng.choice(m, size=count, replace=count > m)
    return model.points[idx]


def save_object_model(model: ObjectModel, path) -> None:
    """Write the ASCII point list plus its metadata sidecar.

    The point file holds a header line with the point count followed by
    one ``x y z`` line per point (meters). The sidecar ``<stem>.meta``
    carries class_id, diameter, and the symmetry flag.
    """
    path = Path(path)
    lines = [str(model.num_points)]
    lines += [f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}" for p in model.points]
    path.write_text("\n".join(lines) + "\n")
    meta = (f"class_id = {model.class_id}\n"
            f"diameter = {model.diameter:.12g}\n"
            f"symmetric = {'true' if model.symmetric else 'false'}\n")
    path.with_suffix(".meta").write_text(meta)


def load_object_model(path) -> ObjectModel:
    """Load an object model saved by :func:`save_object_model`."""
    path = Path(path)
    raw = path.read_text().split()
    if not raw:
        raise ValueError(f"empty model file: {path}")
    m = int(raw[0])
    coords = np.array(raw[1:], dtype=np.float64)
    if coords.size != 3 * m:
        raise ValueError(f"model file {path} declares {m} points but holds {coords.size // 3}")
    points = coords.reshape(m, 3)
    meta_path = path.with_suffix(".meta")
    meta: dict[str, str] = {}
    for line in meta_path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    return ObjectModel(
        class_id=int(meta["class_id"]),
        points=points,
        diameter=float(meta["diameter"]),
        symmetric=meta.get("symmetric", "false").lower() in ("true", "1", "yes"),
    )

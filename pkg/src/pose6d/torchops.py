"""Differentiable quaternion utilities shared by the losses and the network.

Same (w, x, y, z) convention as :mod:`pose6d.geometry`.
"""

from __future__ import annotations

import torch


def normalize_quat_t(q: torch.Tensor) -> torch.Tensor:
    norm = torch.linalg.vector_norm(q)
    if not torch.isfinite(norm) or norm <= 1e-12:
        raise ValueError("degenerate quaternion: norm is zero or non-finite")
    return q / norm


def quat_to_matrix_t(q: torch.Tensor) -> torch.Tensor:
    """Rotation matrix of a (possibly unnormalized) quaternion, autograd-safe."""
    w, x, y, z = normalize_quat_t(q)
    row0 = torch.stack([1 - 2 * y * y - 2 * z * z, 2 * x * y - 2 * w * z, 2 * x * z + 2 * w * y])
    row1 = torch.stack([2 * x * y + 2 * w * z, 1 - 2 * x * x - 2 * z * z, 2 * y * z - 2 * w * x])
    row2 = torch.stack([2 * x * z - 2 * w * y, 2 * y * z + 2 * w * x, 1 - 2 * x * x - 2 * y * y])
    return torch.stack([row0, row1, row2])


def quat_mul_t(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return torch.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])

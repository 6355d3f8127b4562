"""Training objectives: point-matching pose losses, segmentation loss, totals.

The estimated pose enters as raw head outputs (a quaternion tensor that
is normalized inside the loss path, plus a translation tensor) so
gradients flow back into the network; the ground truth is constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .geometry import Pose, transform_points
from .torchops import quat_to_matrix_t


@dataclass
class LossConfig:
    """Weights and sampling controls for the combined objective."""

    num_points: int = 128          # points drawn from each model per step
    symmetric_classes: frozenset[int] = field(default_factory=frozenset)
    seg_weight: float = 1.0
    pose_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_points < 1:
            raise ValueError("num_points must be >= 1")
        if self.seg_weight < 0 or self.pose_weight < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.seg_weight == 0 and self.pose_weight == 0:
            raise ValueError("at least one loss weight must be positive")
        self.symmetric_classes = frozenset(self.symmetric_classes)

    def uses_symmetric_variant(self, class_id: int) -> bool:
        return class_id in self.symmetric_classes


def _estimated_points(est_quat: torch.Tensor, est_trans: torch.Tensor,
                      points) -> tuple[torch.Tensor, torch.Tensor]:
    pts = torch.as_tensor(np.asarray(points), dtype=est_quat.dtype,
                          device=est_quat.device)
    R = quat_to_matrix_t(est_quat)
    return pts, pts @ R.T + est_trans


def _gt_points(gt: Pose, points, like: torch.Tensor) -> torch.Tensor:
    return torch.as_tensor(transform_points(gt, np.asarray(points)),
                           dtype=like.dtype, device=like.device)


def pose_loss(gt: Pose, est_quat: torch.Tensor, est_trans: torch.Tensor,
              points) -> torch.Tensor:
    """Mean distance between matched points under the two transforms."""
    pts, est_pts = _estimated_points(est_quat, est_trans, points)
    gt_pts = _gt_points(gt, points, pts)
    return torch.linalg.vector_norm(gt_pts - est_pts, dim=1).mean()


def pose_loss_symmetric(gt: Pose, est_quat: torch.Tensor, est_trans: torch.Tensor,
                        points) -> torch.Tensor:
    """Closest-point variant for objects whose point matching is ambiguous.

    Mirrors the symmetric evaluation metric; never larger than the
    matched-point loss on the same inputs.
    """
    pts, est_pts = _estimated_points(est_quat, est_trans, points)
    gt_pts = _gt_points(gt, points, pts)
    return torch.cdist(gt_pts, est_pts).min(dim=1).values.mean()


def segmentation_loss(logits: torch.Tensor, labels) -> torch.Tensor:
    """Mean per-pixel cross entropy; logits are (..., C), labels integer (...)."""
    num_classes = logits.shape[-1]
    labels_t = torch.as_tensor(np.asarray(labels), device=logits.device).long()
    if labels_t.shape != logits.shape[:-1]:
        raise ValueError("labels shape must match logits without the class axis")
    if labels_t.numel() and (labels_t.min() < 0 or labels_t.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    return F.cross_entropy(logits.reshape(-1, num_classes), labels_t.reshape(-1))


def total_loss(seg, pose, cfg: LossConfig):
    """Weighted sum of the segmentation and pose terms."""
    return cfg.seg_weight * seg + cfg.pose_weight * pose

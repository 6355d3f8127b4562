"""Mask smoothing, dilation, and the masked object-crop chain.

Masks here are binary per-class images; a multi-label image is split
into binary masks by the caller. Both filters use edge replication at
the borders so masks touching the image edge are not eroded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class EmptyMaskError(ValueError):
    """The mask selects no pixels; callers decide whether to skip or fail."""


def _windows(mask, size: int) -> np.ndarray:
    """All size x size neighborhoods with edge-replicated padding."""
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.size == 0:
        raise ValueError("mask must be a nonempty 2-D array")
    pad = size // 2
    padded = np.pad(mask.astype(bool), pad, mode="edge")
    return sliding_window_view(padded, (size, size))


def median_filter_3x3(mask) -> np.ndarray:
    """Majority vote over each 3x3 neighborhood of a binary mask."""
    win = _windows(mask, 3)
    return (win.sum(axis=(2, 3)) >= 5).astype(bool)


def dilate_5x5(mask) -> np.ndarray:
    """Binary dilation with a full 5x5 structuring element."""
    win = _windows(mask, 5)
    return win.any(axis=(2, 3))


def clean_mask(mask) -> np.ndarray:
    """Smooth then grow a predicted mask; order is fixed: filter, then dilate."""
    return dilate_5x5(median_filter_3x3(mask))


@dataclass
class CropResult:
    """Object crop with background zeroed and its source bounding box.

    bbox is (row0, col0, row1, col1) with half-open row/col ranges, the
    tight axis-aligned box of the mask's nonzero pixels.
    """

    rgb_crop: np.ndarray
    depth_crop: np.ndarray
    mask_crop: np.ndarray
    bbox: tuple[int, int, int, int]
    class_id: int


def masked_crop(rgb, depth, mask, class_id: int) -> CropResult:
    """Zero everything outside the mask and cut the tight bounding box."""
    rgb = np.asarray(rgb)
    depth = np.asarray(depth)
    mask = np.asarray(mask).astype(bool)
    if rgb.shape[:2] != mask.shape or depth.shape != mask.shape:
        raise ValueError("rgb, depth, and mask must share spatial size")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if len(rows) == 0:
        raise EmptyMaskError(f"mask for class {class_id} selects no pixels")
    r0, r1 = int(rows[0]), int(rows[-1]) + 1
    c0, c1 = int(cols[0]), int(cols[-1]) + 1
    sub = mask[r0:r1, c0:c1]
    rgb_crop = np.where(sub[..., None], rgb[r0:r1, c0:c1], 0)
    depth_crop = np.where(sub, depth[r0:r1, c0:c1], 0)
    return CropResult(rgb_crop, depth_crop, sub.copy(), (r0, c0, r1, c1), class_id)

"""Pose evaluation metrics: ADD, ADD-S, threshold accuracy, and ADD-S AUC.

A result triple is ``(gt_pose, est_pose, model)``; ``est_pose`` may be
None for a missed detection, which counts as an infinite distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import ObjectModel, Pose, transform_points

# Standard protocol constants inherited from the common benchmarks; they
# are not fixed by the method itself, so both are config-overridable and
# echoed into every report.
DEFAULT_THRESHOLD_FRACTION = 0.10   # accuracy cutoff as a fraction of diameter
DEFAULT_AUC_MAX_THRESHOLD = 0.10    # meters; AUC integration upper bound


def add_points(gt: Pose, est: Pose, points) -> float:
    """Mean distance between point images under the two transforms."""
    return float(np.linalg.norm(
        transform_points(gt, points) - transform_points(est, points), axis=1).mean())


def adds_points(gt: Pose, est: Pose, points, method: str = "exact") -> float:
    """Mean closest-point distance between the two transformed point sets.

    ``method="exact"`` uses the full pairwise distance matrix;
    ``method="kdtree"`` is an accelerated path that must agree with it.
    """
    gt_pts = transform_points(gt, points)
    est_pts = transform_points(est, points)
    if method == "exact":
        diff = gt_pts[:, None, :] - est_pts[None, :, :]
        nearest = np.sqrt((diff ** 2).sum(axis=2)).min(axis=1)
    elif method == "kdtree":
        nearest, _ = cKDTree(est_pts).query(gt_pts, k=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(nearest.mean())


def add(gt: Pose, est: Pose, model: ObjectModel) -> float:
    """Average distance of model points between ground-truth and estimate."""
    return add_points(gt, est, model.points)


def adds(gt: Pose, est: Pose, model: ObjectModel, method: str = "exact") -> float:
    """Average closest-point distance; the symmetric-object variant of add."""
    return adds_points(gt, est, model.points, method=method)


def _result_distance(gt: Pose, est: Pose | None, model: ObjectModel) -> float:
    """Per-result metric value: adds for symmetric models, add otherwise."""
    if est is None:
        return math.inf
    return adds(gt, est, model) if model.symmetric else add(gt, est, model)


def pose_accuracy(results, threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION) -> float:
    """Fraction of results whose distance is strictly below the per-model cutoff.

    The cutoff is threshold_fraction times each model's diameter; a value
    exactly at the cutoff counts as a failure.
    """
    if threshold_fraction <= 0:
        raise ValueError("threshold_fraction must be positive")
    results = list(results)
    if not results:
        raise ValueError("results must be nonempty")
    hits = sum(
        _result_distance(gt, est, model) < threshold_fraction * model.diameter
        for gt, est, model in results)
    return hits / len(results)


def adds_auc(results, max_threshold: float = DEFAULT_AUC_MAX_THRESHOLD) -> float:
    """Normalized area under the ADD-S accuracy-vs-threshold curve.

    The curve is a right-continuous step function of the ADD-S values, so
    the area over [0, max_threshold] is computed exactly as
    mean(max(0, max_threshold - d)) / max_threshold.
    """
    if max_threshold <= 0:
        raise ValueError("max_threshold must be positive")
    results = list(results)
    if not results:
        raise ValueError("results must be nonempty")
    values = np.array([
        adds(gt, est, model) if est is not None else math.inf
        for gt, est, model in results])
    return float(np.clip(max_threshold - values, 0.0, None).mean() / max_threshold)


@dataclass
class ObjectMetrics:
    """One table row: mean distances in meters plus fractions in [0, 1]."""

    add_mean: float
    adds_mean: float
    accuracy: float
    auc: float

    COLUMNS = ("add_mean", "adds_mean", "accuracy", "auc")

    def as_dict(self) -> dict[str, float]:
        return {c: getattr(self, c) for c in self.COLUMNS}


@dataclass
class MetricReport:
    """Per-class metric rows plus their unweighted overall average.

    The threshold constants used are echoed alongside the numbers since
    they are protocol defaults rather than intrinsic to the method.
    """

    per_object: dict[int, ObjectMetrics]
    overall: ObjectMetrics
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION
    auc_max_threshold: float = DEFAULT_AUC_MAX_THRESHOLD

    @property
    def class_ids(self) -> list[int]:
        return sorted(self.per_object)


def build_report(results,
                 threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
                 auc_max_threshold: float = DEFAULT_AUC_MAX_THRESHOLD) -> MetricReport:
    """Group results by model class and tabulate all metric columns.

    ``results`` is either an iterable of (gt, est, model) triples or a
    mapping class_id -> list of triples.
    """
    if isinstance(results, dict):
        grouped = {cid: list(rs) for cid, rs in results.items() if rs}
    else:
        grouped: dict[int, list] = {}
        for gt, est, model in results:
            grouped.setdefault(model.class_id, []).append((gt, est, model))
    if not grouped:
        raise ValueError("no results to report")

    per_object: dict[int, ObjectMetrics] = {}
    for cid in sorted(grouped):
        rs = grouped[cid]
        add_vals = [add(gt, est, model) if est is not None else math.inf
                    for gt, est, model in rs]
        adds_vals = [adds(gt, est, model) if est is not None else math.inf
                     for gt, est, model in rs]
        per_object[cid] = ObjectMetrics(
            add_mean=float(np.mean(add_vals)),
            adds_mean=float(np.mean(adds_vals)),
            accuracy=pose_accuracy(rs, threshold_fraction),
            auc=adds_auc(rs, auc_max_threshold),
        )
    overall = ObjectMetrics(*(
        float(np.mean([row.as_dict()[c] for row in per_object.values()]))
        for c in ObjectMetrics.COLUMNS))
    return MetricReport(per_object, overall, threshold_fraction, auc_max_threshold)

"""Evaluation metrics: retrieval-style AP over voxels and pixels, rotation
accuracy/median geodesic error, and translation median offset ratio.

AP treats every voxel (or pixel) as a retrieval instance scored by its
predicted occupancy, positive where the ground truth is 1: instances are
ranked by descending score with ties broken by ascending flat index, and AP
is the mean over positives of the precision at that positive's rank.  The
rank formula makes AP invariant under strictly monotone rescaling of the
scores and well-defined for binary predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .projection import Silhouette
from .rotation import PoseParams, geodesic_distance, rotation_from_twist
from .shape import VoxelGrid

ROTATION_ACC_THRESHOLD = math.pi / 6.0
DEFAULT_FRAME_SIZE = 30.0


@dataclass(frozen=True, eq=False)
class EvalRecord:
    """One evaluation instance; any field may be None when that modality is
    not being scored."""

    pred_grid: VoxelGrid | None = None
    gt_grid: VoxelGrid | None = None
    pred_sil: Silhouette | None = None
    gt_sil: Silhouette | None = None
    pred_pose: PoseParams | None = None
    gt_pose: PoseParams | None = None


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated metrics; fields without any evaluable pairs are NaN."""

    ap3d: float
    ap2d: float
    acc_pi_over_6: float
    med_err_rotation: float
    med_err_translation: float
    count: int

    def to_tsv(self) -> str:
        """Single-line tab-separated record (header-free)."""
        return "\t".join(
            [
                f"{self.ap3d:.6f}",
                f"{self.ap2d:.6f}",
                f"{self.acc_pi_over_6:.6f}",
                f"{self.med_err_rotation:.6f}",
                f"{self.med_err_translation:.6f}",
                str(self.count),
            ]
        )

    def to_table(self) -> str:
        rows = [
            ("3D AP", f"{self.ap3d:.4f}"),
            ("2D AP", f"{self.ap2d:.4f}"),
            ("rotation Acc_pi/6", f"{self.acc_pi_over_6:.4f}"),
            ("rotation MedErr (deg)", f"{self.med_err_rotation:.2f}"),
            ("translation MedErr", f"{self.med_err_translation:.4f}"),
            ("records", str(self.count)),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _ranked_ap(scores: np.ndarray, positives: np.ndarray) -> float:
    n_pos = int(positives.sum())
    if n_pos == 0:
        if np.any(scores != 0.0):
            raise ValueError("AP undefined: no positives but nonzero predictions")
        return 1.0
    order = np.lexsort((np.arange(scores.size), -scores))
    hits = np.cumsum(positives[order])
    ranks = np.arange(1, scores.size + 1)
    return float(np.sum(hits[positives[order]] / ranks[positives[order]]) / n_pos)


def voxel_ap(pred: VoxelGrid, gt: VoxelGrid) -> float:
    """Average precision of predicted occupancies against a binary grid."""
    if pred.q != gt.q:
        raise ValueError(f"grid sides differ: {pred.q} vs {gt.q}")
    if not gt.binary and not np.all((gt.values == 0) | (gt.values == 1)):
        raise ValueError("ground-truth grid must be binary")
    return _ranked_ap(pred.flat(), gt.flat() == 1.0)


def silhouette_ap(pred: Silhouette, gt: Silhouette) -> float:
    """Average precision of a predicted silhouette against a binary mask."""
    if pred.q != gt.q:
        raise ValueError(f"silhouette sides differ: {pred.q} vs {gt.q}")
    if not np.all((gt.values == 0) | (gt.values == 1)):
        raise ValueError("ground-truth silhouette must be binary")
    return _ranked_ap(pred.flat(), gt.flat() == 1.0)


def rotation_metrics(pairs) -> tuple[float, float]:
    """Accuracy below pi/6 (strict) and median geodesic error in degrees.

    ``pairs`` is a sequence of (predicted PoseParams, ground-truth
    PoseParams); the error of a pair is the geodesic distance between the
    two rotation matrices.
    """
    if len(pairs) == 0:
        raise ValueError("rotation_metrics needs at least one pair")
    errors = np.array(
        [
            geodesic_distance(rotation_from_twist(pred.w), rotation_from_twist(gt.w))
            for pred, gt in pairs
        ]
    )
    acc = float(np.mean(errors < ROTATION_ACC_THRESHOLD))
    return acc, float(np.degrees(np.median(errors)))


def translation_mederr(pairs, frame: float = DEFAULT_FRAME_SIZE) -> float:
    """Median over pairs of the Euclidean offset divided by the frame size."""
    if len(pairs) == 0:
        raise ValueError("translation_mederr needs at least one pair")
    if frame <= 0:
        raise ValueError("frame size must be positive")
    offsets = np.array(
        [np.linalg.norm(np.asarray(pred, dtype=float) - np.asarray(gt, dtype=float)) for pred, gt in pairs]
    )
    return float(np.median(offsets) / frame)


def evaluate_records(records, frame: float = DEFAULT_FRAME_SIZE) -> MetricsReport:
    """Aggregate a batch of EvalRecords into one report.

    Each metric is computed over the records that carry both sides of the
    needed data; a metric with no such records comes out NaN.
    """
    ap3 = [
        voxel_ap(r.pred_grid, r.gt_grid)
        for r in records
        if r.pred_grid is not None and r.gt_grid is not None
    ]
    ap2 = [
        silhouette_ap(r.pred_sil, r.gt_sil)
        for r in records
        if r.pred_sil is not None and r.gt_sil is not None
    ]
    pose_pairs = [
        (r.pred_pose, r.gt_pose)
        for r in records
        if r.pred_pose is not None and r.gt_pose is not None
    ]
    if pose_pairs:
        acc, med_rot = rotation_metrics(pose_pairs)
        med_tr = translation_mederr([(p.t, g.t) for p, g in pose_pairs], frame=frame)
    else:
        acc, med_rot, med_tr = float("nan"), float("nan"), float("nan")
    return MetricsReport(
        ap3d=float(np.mean(ap3)) if ap3 else float("nan"),
        ap2d=float(np.mean(ap2)) if ap2 else float("nan"),
        acc_pi_over_6=acc,
        med_err_rotation=med_rot,
        med_err_translation=med_tr,
        count=len(records),
    )

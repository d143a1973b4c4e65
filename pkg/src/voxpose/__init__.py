"""Differentiable pose-aware voxel shape fitting from single silhouettes.

A shape is an occupancy grid generated from a style vector by a fixed linear
logit-space basis, posed by an exponential-twist rigid warp, and reprojected
to a silhouette; fitting recovers style and pose from one target silhouette
by multi-start gradient descent on the binary-cross-entropy reprojection
loss.
"""

from .fit import (
    FitConfig,
    FitResult,
    finite_difference_gradient,
    fit_pose_style,
    fit_single,
    synthesize_target,
    target_floor_loss,
)
from .io import (
    load_manifest,
    read_basis,
    read_pgm,
    read_voxl,
    write_basis,
    write_pgm,
    write_voxl,
)
from .loss import full_gradient, loss_gradient, reprojection_loss
from .metrics import (
    EvalRecord,
    MetricsReport,
    evaluate_records,
    rotation_metrics,
    silhouette_ap,
    translation_mederr,
    voxel_ap,
)
from .projection import (
    Silhouette,
    project_max,
    project_max_subgradient,
    project_soft,
    project_soft_with_gradient,
)
from .rotation import (
    PoseParams,
    geodesic_distance,
    inverse_warp,
    rotation_from_twist,
    rotation_jacobian,
    skew,
    wrap_to_ball,
)
from .shape import (
    StyleBasis,
    VoxelGrid,
    augment_scales,
    encode,
    fit_basis,
    generate,
)
from .warp import transform_adjoint, transform_grid, transform_grid_with_jacobian

__version__ = "0.1.0"

__all__ = [
    "FitConfig",
    "FitResult",
    "EvalRecord",
    "MetricsReport",
    "PoseParams",
    "Silhouette",
    "StyleBasis",
    "VoxelGrid",
    "augment_scales",
    "encode",
    "evaluate_records",
    "finite_difference_gradient",
    "fit_basis",
    "fit_pose_style",
    "fit_single",
    "full_gradient",
    "generate",
    "geodesic_distance",
    "inverse_warp",
    "load_manifest",
    "loss_gradient",
    "project_max",
    "project_max_subgradient",
    "project_soft",
    "project_soft_with_gradient",
    "read_basis",
    "read_pgm",
    "read_voxl",
    "reprojection_loss",
    "rotation_from_twist",
    "rotation_jacobian",
    "rotation_metrics",
    "silhouette_ap",
    "skew",
    "synthesize_target",
    "target_floor_loss",
    "transform_adjoint",
    "transform_grid",
    "transform_grid_with_jacobian",
    "translation_mederr",
    "voxel_ap",
    "wrap_to_ball",
    "write_basis",
    "write_pgm",
    "write_voxl",
]

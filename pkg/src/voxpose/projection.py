"""Silhouette reprojection of voxel grids along the third (z) axis.

The camera sits at a fixed canonical viewpoint looking down z; all viewpoint
variation is carried by the pose applied before projection.  Two variants:

* ``project_max`` -- hard max along each ray, the ray-tracing semantics where
  the strongest cell wins; used for evaluation and binary outputs.
* ``project_soft`` -- noisy-or aggregation 1 - prod(1 - v), a differentiable
  surrogate that spreads gradient across the whole ray and coincides with the
  max exactly on binary grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shape import VoxelGrid


@dataclass(frozen=True, eq=False)
class Silhouette:
    """A q x q mask with values in [0, 1], indexed ``values[x, y]``.

    Flat layout is x-fastest (``idx = x + q * y``)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"silhouette must be square, got shape {v.shape}")
        if v.min() < -1e-9 or v.max() > 1.0 + 1e-9:
            raise ValueError(
                f"mask values outside [0, 1]: min={v.min()}, max={v.max()}"
            )
        v = np.ascontiguousarray(np.clip(v, 0.0, 1.0))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def q(self) -> int:
        return self.values.shape[0]

    def flat(self) -> np.ndarray:
        """Values as a q^2 vector in x-fastest order."""
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, flat, q: int) -> "Silhouette":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != q * q:
            raise ValueError(f"expected {q * q} values for q={q}, got {flat.size}")
        return cls(values=flat.reshape((q, q), order="F"))


def project_max(grid: VoxelGrid) -> Silhouette:
    """Hard projection: M(x, y) = max over z of the grid value."""
    return Silhouette(values=grid.values.max(axis=2))


def project_max_subgradient(grid: VoxelGrid) -> tuple[Silhouette, np.ndarray]:
    """Hard projection plus the per-pixel z index that receives the
    subgradient (lowest z among ties, ray-tracing order)."""
    argmax = grid.values.argmax(axis=2)
    return Silhouette(values=grid.values.max(axis=2)), argmax


def project_soft(grid: VoxelGrid) -> Silhouette:
    """Noisy-or projection: M(x, y) = 1 - prod over z of (1 - value)."""
    return Silhouette(values=1.0 - np.prod(1.0 - grid.values, axis=2))


def _soft_projection_grad_arrays(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw noisy-or projection and per-voxel derivative (hot path).

    The derivative of pixel (x, y) with respect to voxel (x, y, z) is
    prod over z' != z of (1 - value); computed with exclusive prefix and
    suffix products to stay exact when some values reach 1.
    """
    comp = 1.0 - values
    q = values.shape[2]
    prefix = np.ones_like(comp)
    suffix = np.ones_like(comp)
    prefix[:, :, 1:] = np.cumprod(comp[:, :, :-1], axis=2)
    suffix[:, :, : q - 1] = np.cumprod(comp[:, :, :0:-1], axis=2)[:, :, ::-1]
    return 1.0 - prefix[:, :, -1] * comp[:, :, -1], prefix * suffix


def project_soft_with_gradient(grid: VoxelGrid) -> tuple[Silhouette, np.ndarray]:
    """Noisy-or projection and its per-voxel derivative, see
    ``_soft_projection_grad_arrays`` for the product construction."""
    sil_values, grad = _soft_projection_grad_arrays(grid.values)
    return Silhouette(values=sil_values), grad

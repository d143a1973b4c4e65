"""Voxel occupancy grids and a fixed linear style generator.

Grids are cubes of side ``q`` holding occupancy values in [0, 1], indexed
``values[x, y, z]``.  The flat vector layout used throughout (file formats,
basis matrices, Jacobians) is x-fastest: ``idx = x + q * (y + q * z)``, which
is Fortran-order raveling of the ``[x, y, z]`` array.

The style generator is a principal-component basis in logit space: occupancy
is clamped away from {0, 1}, mapped through the logit, and a shape is
``sigmoid(mu + basis @ s)`` for a style vector ``s``.  The generator is a
fixed prior once fitted; fitting never updates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

# Occupancies are clamped into [LOGIT_CLAMP, 1 - LOGIT_CLAMP] before the
# logit so binary data maps to finite values (+-4.595).
LOGIT_CLAMP = 0.01

BINARIZE_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """A q x q x q occupancy grid with values in [0, 1].

    ``values[x, y, z]``; a grid flagged ``binary`` contains only {0, 1}.
    Instances are immutable: the stored array is a read-only copy.
    """

    values: np.ndarray
    binary: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or len(set(v.shape)) != 1:
            raise ValueError(f"voxel grid must be a cube, got shape {v.shape}")
        if self.binary:
            if not np.all((v == 0.0) | (v == 1.0)):
                raise ValueError("binary grid contains values outside {0, 1}")
            v = np.array(v, order="C")
        else:
            if v.min() < -1e-9 or v.max() > 1.0 + 1e-9:
                raise ValueError(
                    f"occupancy values outside [0, 1]: min={v.min()}, max={v.max()}"
                )
            v = np.ascontiguousarray(np.clip(v, 0.0, 1.0))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def q(self) -> int:
        return self.values.shape[0]

    def flat(self) -> np.ndarray:
        """Values as a q^3 vector in x-fastest order."""
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, flat, q: int, binary: bool = False) -> "VoxelGrid":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != q**3:
            raise ValueError(f"expected {q**3} values for q={q}, got {flat.size}")
        return cls(values=flat.reshape((q, q, q), order="F"), binary=binary)

    def binarized(self, threshold: float = BINARIZE_THRESHOLD) -> "VoxelGrid":
        return VoxelGrid(values=(self.values >= threshold).astype(np.float64), binary=True)


@dataclass(frozen=True, eq=False)
class StyleBasis:
    """Mean + orthonormal basis in logit space.

    ``mu`` is a q^3 vector of logits, ``basis`` a q^3 x m matrix with
    orthonormal columns, ``singular_values`` the corresponding singular
    values of the centered training data (diagnostics only).
    """

    q: int
    mu: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray

    def __post_init__(self):
        n = self.q**3
        mu = np.asarray(self.mu, dtype=np.float64).reshape(n).copy()
        basis = np.asarray(self.basis, dtype=np.float64).reshape(n, -1).copy()
        sv = np.asarray(self.singular_values, dtype=np.float64).reshape(-1).copy()
        if sv.size != basis.shape[1]:
            raise ValueError("singular_values length must match basis column count")
        gram = basis.T @ basis
        if basis.shape[1] > 0 and np.abs(gram - np.eye(basis.shape[1])).max() > 1e-8:
            raise ValueError("basis columns are not orthonormal within 1e-8")
        for a in (mu, basis, sv):
            a.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "singular_values", sv)

    @property
    def m(self) -> int:
        return self.basis.shape[1]


def clamped_logit(values) -> np.ndarray:
    """Logit of occupancies clamped into [LOGIT_CLAMP, 1 - LOGIT_CLAMP]."""
    v = np.clip(np.asarray(values, dtype=np.float64), LOGIT_CLAMP, 1.0 - LOGIT_CLAMP)
    return np.log(v) - np.log1p(-v)


def sigmoid(x) -> np.ndarray:
    return expit(np.asarray(x, dtype=np.float64))


def fit_basis(shapes, m: int) -> StyleBasis:
    """Fit a principal-component style basis to binary voxel grids.

    Occupancies are clamped and mapped to logit space; the basis columns are
    the top-m left singular vectors of the mean-centered data matrix (shapes
    as columns).  Sign convention: each column is flipped, if needed, so its
    largest-magnitude entry is positive.
    """
    if len(shapes) == 0:
        raise ValueError("fit_basis needs at least one shape")
    q = shapes[0].q
    if any(g.q != q for g in shapes):
        raise ValueError("all shapes must share the same grid side")
    if not 0 <= m <= min(len(shapes), q**3):
        raise ValueError(f"m={m} out of range [0, {min(len(shapes), q**3)}]")

    data = np.stack([clamped_logit(g.flat()) for g in shapes], axis=1)
    mu = data.mean(axis=1)
    centered = data - mu[:, None]
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    basis = u[:, :m].copy()
    for j in range(basis.shape[1]):
        k = np.argmax(np.abs(basis[:, j]))
        if basis[k, j] < 0:
            basis[:, j] = -basis[:, j]
    return StyleBasis(q=q, mu=mu, basis=basis, singular_values=s[:m])


def generate(basis: StyleBasis, s) -> VoxelGrid:
    """Decode a style vector into an aligned (canonical-pose) grid:
    per-voxel value sigmoid(mu + basis @ s)."""
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if s.size != basis.m:
        raise ValueError(f"style dimension {s.size} != basis m={basis.m}")
    logits = basis.mu + basis.basis @ s
    return VoxelGrid.from_flat(sigmoid(logits), basis.q)


def encode(basis: StyleBasis, grid: VoxelGrid) -> np.ndarray:
    """Project a grid onto the basis: s = basis^T (logit(values) - mu)."""
    if grid.q != basis.q:
        raise ValueError(f"grid side {grid.q} != basis side {basis.q}")
    return basis.basis.T @ (clamped_logit(grid.flat()) - basis.mu)


def _resample_scaled(values: np.ndarray, scale: float) -> np.ndarray:
    """Trilinear resample about the grid center with coordinates divided by
    ``scale`` (scale < 1 shrinks content); zero padding outside."""
    q = values.shape[0]
    c = (q - 1) / 2.0
    axis = (np.arange(q) - c) / scale + c
    src = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    f = np.floor(src).astype(np.int64)
    d = src - f
    out = np.zeros(len(src))
    for dx in (0, 1):
        wx = d[:, 0] if dx else 1.0 - d[:, 0]
        for dy in (0, 1):
            wy = d[:, 1] if dy else 1.0 - d[:, 1]
            for dz in (0, 1):
                wz = d[:, 2] if dz else 1.0 - d[:, 2]
                cx, cy, cz = f[:, 0] + dx, f[:, 1] + dy, f[:, 2] + dz
                ok = (
                    (cx >= 0) & (cx < q) & (cy >= 0) & (cy < q) & (cz >= 0) & (cz < q)
                )
                corner = np.zeros(len(src))
                corner[ok] = values[cx[ok], cy[ok], cz[ok]]
                out += wx * wy * wz * corner
    return out.reshape((q, q, q))


def augment_scales(shapes, scales, rng_seed: int = 0) -> list[VoxelGrid]:
    """Rescaled copies of binary shapes, one per (shape, scale) pair.

    Each output is the shape resampled about the grid center with coordinates
    divided by the scale (trilinear), binarized at 0.5.  Output order is
    shape-major then scale, deterministic given the inputs; the seed is part
    of the interface for provenance and does not currently affect results.
    """
    scales = [float(s) for s in scales]
    for s in scales:
        if not 0.0 < s <= 1.0:
            raise ValueError(f"scale {s} outside (0, 1]")
    out = []
    for grid in shapes:
        if not grid.binary:
            raise ValueError("augment_scales expects binary grids")
        for s in scales:
            if s == 1.0:
                out.append(VoxelGrid(values=grid.values, binary=True))
            else:
                resampled = _resample_scaled(grid.values, s)
                out.append(
                    VoxelGrid(values=(resampled >= BINARIZE_THRESHOLD).astype(np.float64), binary=True)
                )
    return out

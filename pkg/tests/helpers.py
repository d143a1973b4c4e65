"""Shared builders for the test suite."""

import numpy as np

from voxpose.rotation import PoseParams, rotation_from_twist
from voxpose.shape import VoxelGrid, fit_basis


def fd_safe_pose(rng, q, margin=2.5e-4, max_norm=np.pi - 0.1, t_range=1.5, max_tries=20000):
    """A random pose whose sample points all stay ``margin`` clear of
    trilinear cell boundaries, so finite differences of the warp are taken
    on a smooth piece of the interpolant."""
    c = (q - 1) / 2.0
    x, y, z = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    lattice = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1).astype(float)
    for _ in range(max_tries):
        w = rng.normal(size=3)
        w *= rng.uniform(0.0, max_norm) / np.linalg.norm(w)
        t = rng.uniform(-t_range, t_range, size=2)
        p = PoseParams(w=w, t=t)
        src = (lattice - c - p.t3) @ rotation_from_twist(w) + c
        frac = src - np.floor(src)
        if min(frac.min(), (1.0 - frac).min()) > margin:
            return p
    raise RuntimeError("no cell-boundary-safe pose found")


def random_binary_grid(rng, q, fill=0.4):
    return VoxelGrid((rng.random((q, q, q)) < fill).astype(float), binary=True)


def random_basis(rng, q, m, count=None):
    """A style basis fitted to random binary grids."""
    count = count if count is not None else max(m + 2, 5)
    shapes = [random_binary_grid(rng, q) for _ in range(count)]
    return fit_basis(shapes, m)


def tripod_grid(q, arms, girth=1):
    """An asymmetric blocky shape: a core at the center with three unequal
    axis-aligned arms (lengths ``arms``) plus one diagonal stub, so no
    rotation or reflection maps it onto itself."""
    c = q // 2
    v = np.zeros((q, q, q))
    g = girth
    v[c - g : c + g + 1, c - g : c + g + 1, c - g : c + g + 1] = 1.0
    ax, ay, az = arms
    v[c : c + ax, c - g : c + g + 1, c - g : c + g + 1] = 1.0
    v[c - g : c + g + 1, c : c + ay, c - g : c + g + 1] = 1.0
    v[c - g : c + g + 1, c - g : c + g + 1, c : c + az] = 1.0
    stub = max(2, min(ax, ay, az) // 2)
    for k in range(stub):
        v[c - 1 - k, c - 1 - k, c - g : c + g + 1] = 1.0
    return VoxelGrid(v, binary=True)


def tripod_family(rng, q, count):
    """Random asymmetric tripod shapes for synthesize-then-recover runs."""
    lo = max(3, q // 6)
    hi = max(lo + 2, (q - 2) // 2 - 1)
    shapes = []
    for _ in range(count):
        arms = rng.integers(lo, hi + 1, size=3)
        shapes.append(tripod_grid(q, arms))
    return shapes

"""Exponential-twist rotation math.

Rotations are parametrized by a twist vector ``w`` in R^3: the rotation axis
is ``w / |w|`` and the rotation angle is ``|w|`` radians.  Constraining ``w``
to the closed ball of radius pi makes the parametrization injective up to the
boundary; :func:`wrap_to_ball` maps any twist to an equivalent one inside the
ball.  Rotation matrices are plain ``(3, 3)`` float arrays.

A full pose is a twist plus a 2-vector of in-plane translation (5 degrees of
freedom); the third translation component is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below these twist norms the closed forms are replaced by their small-angle
# limits (Rodrigues: second-order Taylor; Jacobian: the w -> 0 limit).
RODRIGUES_TAYLOR_EPS = 1e-8
JACOBIAN_TAYLOR_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class PoseParams:
    """A 5-DOF pose: twist ``w`` (3 rotation DOF) and in-plane translation
    ``t = (t_x, t_y)`` in voxel units.  The implied 3D translation is
    ``[t_x, t_y, 0]``."""

    w: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).reshape(3).copy()
        t = np.asarray(self.t, dtype=np.float64).reshape(2).copy()
        w.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "t", t)

    @property
    def t3(self) -> np.ndarray:
        """Translation as a 3-vector with zero z component."""
        return np.array([self.t[0], self.t[1], 0.0])

    def as_vector(self) -> np.ndarray:
        """Pack as ``[w1, w2, w3, t_x, t_y]``."""
        return np.concatenate([self.w, self.t])

    @classmethod
    def from_vector(cls, p) -> "PoseParams":
        p = np.asarray(p, dtype=np.float64).reshape(5)
        return cls(w=p[:3], t=p[3:])

    @classmethod
    def identity(cls) -> "PoseParams":
        return cls()


def skew(n) -> np.ndarray:
    """Skew-symmetric matrix [n]x such that [n]x @ u == cross(n, u)."""
    n = np.asarray(n, dtype=np.float64)
    return np.array([
        [0.0, -n[2], n[1]],
        [n[2], 0.0, -n[0]],
        [-n[1], n[0], 0.0],
    ])


def rotation_from_twist(w) -> np.ndarray:
    """Rotation matrix of a twist via the Rodrigues formula.

    R = I + sin(phi) [n]x + (1 - cos(phi)) [n]x^2 with phi = |w|, n = w/phi.
    For phi below ``RODRIGUES_TAYLOR_EPS`` the second-order Taylor expansion
    R = I + [w]x + 0.5 [w]x^2 is used instead.
    """
    w = np.asarray(w, dtype=np.float64)
    phi = float(np.linalg.norm(w))
    if phi < RODRIGUES_TAYLOR_EPS:
        K = skew(w)
        return np.eye(3) + K + 0.5 * (K @ K)
    K = skew(w / phi)
    return np.eye(3) + np.sin(phi) * K + (1.0 - np.cos(phi)) * (K @ K)


def rotation_jacobian(w) -> np.ndarray:
    """Derivatives of the rotation matrix with respect to the twist.

    Returns a ``(3, 3, 3)`` array whose slice ``[i]`` is dR/dw_i, using the
    closed form

        dR/dw_i = ((w_i [w]x + [w x ((I - R) e_i)]x) / |w|^2) R

    with the limit dR/dw_i = [e_i]x below ``JACOBIAN_TAYLOR_EPS``.
    """
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros((3, 3, 3))
    eye = np.eye(3)
    if float(np.linalg.norm(w)) < JACOBIAN_TAYLOR_EPS:
        for i in range(3):
            out[i] = skew(eye[i])
        return out
    R = rotation_from_twist(w)
    Wx = skew(w)
    norm_sq = float(w @ w)
    for i in range(3):
        v = np.cross(w, (eye - R) @ eye[i])
        out[i] = ((w[i] * Wx + skew(v)) / norm_sq) @ R
    return out


def wrap_to_ball(w) -> np.ndarray:
    """Map a twist to the equivalent one inside the pi-ball.

    A rotation by |w| about n equals a rotation by 2*pi - |w| about -n, so a
    twist outside the ball is replaced by ``w * (1 - 2*pi/|w|)``, repeated
    until the norm is at most pi.  Twists already inside are returned as is.
    """
    w = np.asarray(w, dtype=np.float64).copy()
    norm = float(np.linalg.norm(w))
    while norm > np.pi:
        w = w * (1.0 - 2.0 * np.pi / norm)
        norm = float(np.linalg.norm(w))
    return w


def inverse_warp(x, p: PoseParams) -> np.ndarray:
    """Inverse rigid warp of a point in centered grid coordinates.

    ``x`` is a homogeneous 4-vector (or a plain 3-vector, taken to have unit
    homogeneous coordinate) expressed relative to the grid center.  Returns
    the top three rows of ``inv([R t; 0 1]) @ x``, i.e. ``R^T (x[:3] - t)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape == (4,):
        xyz, hom = x[:3], x[3]
    elif x.shape == (3,):
        xyz, hom = x, 1.0
    else:
        raise ValueError(f"expected a 3- or 4-vector, got shape {x.shape}")
    R = rotation_from_twist(p.w)
    return R.T @ (xyz - hom * p.t3)


def geodesic_distance(a, b) -> float:
    """Geodesic distance between two rotation matrices, in radians.

    The angle of the relative rotation: arccos((trace(a^T b) - 1) / 2),
    clamped into [-1, 1] before the arccos; the result lies in [0, pi].
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cos_theta = (np.trace(a.T @ b) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos_theta, -1.0, 1.0)))

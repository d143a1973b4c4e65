"""Binary-cross-entropy reprojection loss and its analytic gradient chain.

The loss compares a predicted silhouette against a target, averaged over the
q^2 pixels; predictions are clamped into [1e-7, 1 - 1e-7] before the logs
since the cross-entropy is undefined at {0, 1}.  ``full_gradient`` assembles
the complete backward pass generator -> rigid warp -> soft projection ->
loss, returning gradients with respect to style and pose only: the generator
is a fixed prior and never receives gradient.
"""

from __future__ import annotations

import numpy as np

from .projection import Silhouette, _soft_projection_grad_arrays
from .rotation import PoseParams
from .shape import StyleBasis, sigmoid
from .warp import _adjoint_flat, _forward_with_jacobian_flat

LOSS_CLAMP_EPS = 1e-7


def _bce_arrays(pred_raw: np.ndarray, gt: np.ndarray) -> float:
    pred = np.clip(pred_raw, LOSS_CLAMP_EPS, 1.0 - LOSS_CLAMP_EPS)
    return float(np.mean(-gt * np.log(pred) - (1.0 - gt) * np.log(1.0 - pred)))


def _bce_grad_arrays(pred_raw: np.ndarray, gt: np.ndarray) -> np.ndarray:
    pred = np.clip(pred_raw, LOSS_CLAMP_EPS, 1.0 - LOSS_CLAMP_EPS)
    grad = (-gt / pred + (1.0 - gt) / (1.0 - pred)) / pred.size
    grad[(pred_raw <= LOSS_CLAMP_EPS) & (grad > 0.0)] = 0.0
    grad[(pred_raw >= 1.0 - LOSS_CLAMP_EPS) & (grad < 0.0)] = 0.0
    return grad


def reprojection_loss(m: Silhouette, m_gt: Silhouette) -> float:
    """Mean binary cross-entropy between predicted and target silhouettes."""
    if m.q != m_gt.q:
        raise ValueError(f"silhouette sides differ: {m.q} vs {m_gt.q}")
    return _bce_arrays(m.values, m_gt.values)


def loss_gradient(m: Silhouette, m_gt: Silhouette) -> np.ndarray:
    """Per-pixel derivative of the reprojection loss with respect to ``m``.

    Evaluated at the clamped prediction; where the prediction sits at a clamp
    bound and the unclamped gradient points outward, the gradient is zeroed
    (projected-gradient convention).  Returns a (q, q) array indexed like
    silhouette values.
    """
    if m.q != m_gt.q:
        raise ValueError(f"silhouette sides differ: {m.q} vs {m_gt.q}")
    return _bce_grad_arrays(m.values, m_gt.values)


def full_gradient(
    basis: StyleBasis, s, p: PoseParams, m_gt: Silhouette
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss and analytic gradients with respect to style and pose.

    Chains generate -> transform (with pose Jacobian) -> soft projection ->
    cross-entropy.  Returns (loss, grad_s (m,), grad_p (5,)); the basis is
    held fixed.
    """
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if s.size != basis.m:
        raise ValueError(f"style dimension {s.size} != basis m={basis.m}")
    if m_gt.q != basis.q:
        raise ValueError(f"target side {m_gt.q} != basis side {basis.q}")
    q = basis.q

    aligned_flat = sigmoid(basis.mu + basis.basis @ s)
    aligned = aligned_flat.reshape((q, q, q), order="F")

    posed, jac = _forward_with_jacobian_arrays(np.ascontiguousarray(aligned), q, p)
    sil_values, dmask_dvox = _soft_projection_grad_arrays(posed)

    loss = _bce_arrays(sil_values, m_gt.values)
    dloss_dmask = _bce_grad_arrays(sil_values, m_gt.values)

    dloss_dout = dloss_dmask[:, :, None] * dmask_dvox
    grad_p = jac.T @ dloss_dout.ravel(order="F")

    dloss_daligned = _adjoint_arrays(dloss_dout, q, p).ravel(order="F")
    grad_s = basis.basis.T @ (dloss_daligned * aligned_flat * (1.0 - aligned_flat))
    return loss, grad_s, grad_p

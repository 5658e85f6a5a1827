"""Pyramidal Horn–Schunck optical flow and linear temporal flow scaling.

Per pyramid level the second frame is warped toward the first by the
upsampled coarser flow, brightness constancy is linearized around that flow
and block-Jacobi sweeps minimize

    E(u, v) = sum_p (Ix (u - u0) + Iy (v - v0) + It)^2
              + alpha^2 / 4 * sum_{p~q} ((u_p - u_q)^2 + (v_p - v_q)^2)

over 4-connected neighbor pairs. Interior pixels reduce to the classic update
u = u_bar - Ix * r / (alpha^2 + Ix^2 + Iy^2). Because twice the block
diagonal minus the system matrix is positive semidefinite for this energy,
every sweep is non-increasing in E.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from app.exceptions import ValueRangeError
from app.models.imaging import FlowField, Frame
from app.schemas.schemas import FlowParams
from app.utils.imaging_utils import bilinear_plane, gaussian_smooth, require_same_size, resize_plane, to_luma

logger = logging.getLogger(__name__)

MIN_LEVEL_SIZE = 8
CENTRAL_DIFFERENCE = [-0.5, 0.0, 0.5]


def scale_flow(flow: FlowField, t: float) -> FlowField:
    """Multiply every displacement by ``t`` (short-term linear motion)."""
    if not 0.0 <= t <= 1.0:
        raise ValueRangeError(f"flow scale t must lie in [0, 1], got {t}")
    return FlowField(u=flow.u * t, v=flow.v * t)


def endpoint_error(flow: FlowField, reference: FlowField, region: Optional[np.ndarray] = None) -> float:
    """Mean Euclidean distance between two flows, optionally over a boolean region."""
    require_same_size(flow, reference, what="flows")
    epe = np.hypot(flow.u - reference.u, flow.v - reference.v)
    if region is not None:
        epe = epe[region]
    return float(epe.mean())


def _neighbor_sum(field: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="constant")
    total = padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    return total


def _degree(shape: Tuple[int, int]) -> np.ndarray:
    return np.maximum(_neighbor_sum(np.ones(shape)), 1.0)


def hs_energy(Ix: np.ndarray, Iy: np.ndarray, It: np.ndarray, u0: np.ndarray, v0: np.ndarray,
              u: np.ndarray, v: np.ndarray, alpha: float) -> float:
    """Discrete Horn–Schunck energy at one level (see module docstring)."""
    residual = Ix * (u - u0) + Iy * (v - v0) + It
    smooth = (np.sum(np.diff(u, axis=0) ** 2) + np.sum(np.diff(u, axis=1) ** 2)
              + np.sum(np.diff(v, axis=0) ** 2) + np.sum(np.diff(v, axis=1) ** 2))
    return float(np.sum(residual ** 2) + alpha ** 2 / 4.0 * smooth)


def jacobi_sweeps(Ix: np.ndarray, Iy: np.ndarray, It: np.ndarray, u0: np.ndarray, v0: np.ndarray,
                  alpha: float, iterations: int,
                  energies: Optional[List[float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    degree = _degree(u0.shape)
    alpha_p = alpha ** 2 * degree / 4.0
    denominator = alpha_p + Ix ** 2 + Iy ** 2
    u, v = u0.copy(), v0.copy()
    if energies is not None:
        energies.append(hs_energy(Ix, Iy, It, u0, v0, u, v, alpha))
    for _ in range(iterations):
        u_bar = _neighbor_sum(u) / degree
        v_bar = _neighbor_sum(v) / degree
        r = (Ix * (u_bar - u0) + Iy * (v_bar - v0) + It) / denominator
        u = u_bar - Ix * r
        v = v_bar - Iy * r
        if energies is not None:
            energies.append(hs_energy(Ix, Iy, It, u0, v0, u, v, alpha))
    return u, v


def _pyramid(plane: np.ndarray, params: FlowParams) -> List[np.ndarray]:
    levels = [plane]
    while len(levels) < params.pyramid_levels:
        height, width = levels[-1].shape
        size = (int(round(width * params.downscale_factor)), int(round(height * params.downscale_factor)))
        if min(size) < MIN_LEVEL_SIZE:
            break
        smoothed = gaussian_smooth(levels[-1], params.presmooth_sigma) if params.presmooth_sigma > 0 else levels[-1]
        levels.append(resize_plane(smoothed, size))
    return levels


def _upsample(u: np.ndarray, v: np.ndarray, shape: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    height, width = shape
    sy, sx = height / u.shape[0], width / u.shape[1]
    return resize_plane(u, (width, height)) * sx, resize_plane(v, (width, height)) * sy


def _derivatives(a: np.ndarray, warped_b: np.ndarray, sigma: float):
    if sigma > 0:
        a = gaussian_smooth(a, sigma)
        warped_b = gaussian_smooth(warped_b, sigma)
    mean = 0.5 * (a + warped_b)
    # central differences with replicated borders; a length-1 axis has zero derivative
    Ix = ndimage.correlate1d(mean, CENTRAL_DIFFERENCE, axis=1, mode="nearest")
    Iy = ndimage.correlate1d(mean, CENTRAL_DIFFERENCE, axis=0, mode="nearest")
    return Ix, Iy, warped_b - a


def estimate_flow(a: Frame, b: Frame, params: Optional[FlowParams] = None,
                  energy_log: Optional[List[List[float]]] = None) -> FlowField:
    """Dense flow from ``a`` to ``b``.

    If ``energy_log`` is a list, one list of per-sweep energies is appended
    per pyramid level, coarsest first.
    """
    params = params or FlowParams()
    require_same_size(a, b, what="flow inputs")
    pyramid_a = _pyramid(to_luma(a) * 255.0, params)
    pyramid_b = _pyramid(to_luma(b) * 255.0, params)

    u = v = None
    for level in range(len(pyramid_a) - 1, -1, -1):
        la, lb = pyramid_a[level], pyramid_b[level]
        height, width = la.shape
        if u is None:
            u, v = np.zeros_like(la), np.zeros_like(la)
        else:
            u, v = _upsample(u, v, la.shape)
        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        warped_b = bilinear_plane(lb, xs + u, ys + v)
        Ix, Iy, It = _derivatives(la, warped_b, params.presmooth_sigma)
        energies = [] if energy_log is not None else None
        u, v = jacobi_sweeps(Ix, Iy, It, u, v, params.smoothness_alpha, params.iterations_per_level, energies)
        if energy_log is not None:
            energy_log.append(energies)
        logger.debug("flow level=%d size=%dx%d mean_magnitude=%.4f", level, width, height,
                     float(np.hypot(u, v).mean()))

    flow = FlowField(u=u, v=v)
    logger.debug("flow estimated size=%dx%d levels=%d", flow.width, flow.height, len(pyramid_a))
    return flow


def estimate_bidirectional(f1: Frame, f3: Frame,
                           params: Optional[FlowParams] = None) -> Tuple[FlowField, FlowField]:
    """(F13, F31): forward and backward flows between the two input frames."""
    return estimate_flow(f1, f3, params), estimate_flow(f3, f1, params)

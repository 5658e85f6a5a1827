"""Forward (splatting) and backward warping."""
import logging
from typing import Tuple

import numpy as np

from app.exceptions import ValueRangeError
from app.models.imaging import FlowField, Frame, HoleMask
from app.utils.flow_utils import scale_flow
from app.utils.imaging_utils import bilinear_image, require_same_size

logger = logging.getLogger(__name__)

DEFAULT_COVERAGE_THRESHOLD = 0.25


def forward_warp(src: Frame, flow_to_t: FlowField,
                 coverage_threshold: float = DEFAULT_COVERAGE_THRESHOLD) -> Tuple[Frame, HoleMask]:
    """Splat every source pixel to the four grid neighbors of p + flow(p).

    Each target accumulates bilinear weight and weighted color; pixels whose
    total weight stays below ``coverage_threshold`` become holes (value 0).
    Accumulation uses ``np.bincount`` in source raster order, so the result
    does not depend on scheduling.
    """
    if not 0.0 < coverage_threshold <= 1.0:
        raise ValueRangeError(f"coverage_threshold must lie in (0, 1], got {coverage_threshold}")
    width, height = require_same_size(src, flow_to_t, what="frame and flow")
    channels = src.channels

    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    tx = (xs + flow_to_t.u).ravel()
    ty = (ys + flow_to_t.v).ravel()
    x0 = np.floor(tx)
    y0 = np.floor(ty)
    fx = tx - x0
    fy = ty - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    colors = src.data.reshape(-1, channels)

    n = width * height
    weight_sum = np.zeros(n)
    color_sum = np.zeros((n, channels))
    for dx, dy, weight in ((0, 0, (1 - fx) * (1 - fy)),
                           (1, 0, fx * (1 - fy)),
                           (0, 1, (1 - fx) * fy),
                           (1, 1, fx * fy)):
        cx = x0 + dx
        cy = y0 + dy
        inside = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        target = cy[inside] * width + cx[inside]
        w = weight[inside]
        weight_sum += np.bincount(target, weights=w, minlength=n)
        for c in range(channels):
            color_sum[:, c] += np.bincount(target, weights=w * colors[inside, c], minlength=n)

    holes = weight_sum < coverage_threshold
    out = np.zeros_like(color_sum)
    covered = ~holes
    out[covered] = color_sum[covered] / weight_sum[covered, None]
    out = np.clip(out, 0.0, 1.0).reshape(height, width, channels)
    hole_mask = HoleMask(h=holes.reshape(height, width))
    logger.debug("forward warp size=%dx%d holes=%d", width, height, hole_mask.count)
    return Frame(data=out), hole_mask


def backward_warp(src: Frame, flow: FlowField) -> Frame:
    """output(p) = src sampled bilinearly at p + flow(p), clamped to the border."""
    width, height = require_same_size(src, flow, what="frame and flow")
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    warped = bilinear_image(src.data, xs + flow.u, ys + flow.v)
    return Frame(data=np.clip(warped, 0.0, 1.0))


def synthesize_candidates(f1: Frame, f3: Frame, F13: FlowField, F31: FlowField, t: float,
                          coverage_threshold: float = DEFAULT_COVERAGE_THRESHOLD
                          ) -> Tuple[Frame, HoleMask, Frame, HoleMask]:
    """(I1t, H1t, I3t, H3t): both inputs splatted to time ``t``."""
    if not 0.0 < t < 1.0:
        raise ValueRangeError(f"t must lie in (0, 1), got {t}")
    require_same_size(f1, f3, F13, F31, what="frames and flows")
    I1t, H1t = forward_warp(f1, scale_flow(F13, t), coverage_threshold)
    I3t, H3t = forward_warp(f3, scale_flow(F31, 1.0 - t), coverage_threshold)
    return I1t, H1t, I3t, H3t

"""Candidate fusion: contribution mask, attention-weighted sum, hole filling
and the full interpolation pipeline."""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import ndimage

from app.exceptions import ValueRangeError, VFIError
from app.models.imaging import FlowField, Frame, HoleMask, MaskMap
from app.schemas.schemas import FlowParams
from app.utils.flow_utils import estimate_bidirectional
from app.utils.imaging_utils import box_filter, require_same_size
from app.utils.warp_utils import DEFAULT_COVERAGE_THRESHOLD, synthesize_candidates

logger = logging.getLogger(__name__)

MASK_SMOOTHING = 5
FILL_MAX_SWEEPS = 100
_NEIGHBORS_8 = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.float64)


class InterpolationResult(NamedTuple):
    frame: Frame
    I1t: Frame
    H1t: HoleMask
    I3t: Frame
    H3t: HoleMask
    joint_holes: HoleMask
    contribution: MaskMap
    F13: FlowField
    F31: FlowField


def attention_fuse(in1: Frame, in2: Frame, w: MaskMap) -> Frame:
    """I_o = W * I_in1 + (1 - W) * I_in2, per pixel and channel."""
    require_same_size(in1, in2, w, what="fusion inputs")
    if in1.channels != in2.channels:
        raise ValueRangeError(f"fusion inputs differ in channels: {in1.channels} vs {in2.channels}")
    weights = w.w[:, :, None]
    fused = weights * in1.data + (1.0 - weights) * in2.data
    # Convex combination; clip only removes rounding below 0 or above 1.
    return Frame(data=np.clip(fused, 0.0, 1.0))


def contribution_mask(I1t: Frame, I3t: Frame, F13: FlowField, F31: FlowField,
                      H1t: HoleMask, H3t: HoleMask, t: float) -> MaskMap:
    """Weight toward I1t: 1 - t, forced to 0 / 1 where only one candidate has a hole.

    The map is 5x5 box-smoothed against seams, then the exclusive-hole
    overrides are applied again. Joint holes keep the base weight.
    """
    require_same_size(I1t, I3t, F13, F31, H1t, H3t, what="contribution mask inputs")
    if not 0.0 <= t <= 1.0:
        raise ValueRangeError(f"t must lie in [0, 1], got {t}")
    only_1 = H1t.h & ~H3t.h
    only_3 = H3t.h & ~H1t.h
    w = np.full(H1t.h.shape, 1.0 - t)
    w[only_1] = 0.0
    w[only_3] = 1.0
    w = np.clip(box_filter(w, MASK_SMOOTHING), 0.0, 1.0)
    w[only_1] = 0.0
    w[only_3] = 1.0
    return MaskMap(w=w)


def fill_joint_holes(frame: Frame, joint: HoleMask) -> Frame:
    """Grow valid pixels into holes: each sweep sets a hole pixel with at least
    one valid 8-neighbor to the mean of those neighbors."""
    require_same_size(frame, joint, what="frame and hole mask")
    if not joint.h.any():
        return frame
    if joint.h.all():
        raise VFIError("cannot fill holes: every pixel is a hole")
    data = np.array(frame.data)
    holes = joint.h.copy()
    sweeps = 0
    while holes.any() and sweeps < FILL_MAX_SWEEPS:
        valid = (~holes).astype(np.float64)
        count = ndimage.convolve(valid, _NEIGHBORS_8, mode="constant", cval=0.0)
        fillable = holes & (count > 0)
        for c in range(data.shape[2]):
            total = ndimage.convolve(data[:, :, c] * valid, _NEIGHBORS_8, mode="constant", cval=0.0)
            data[:, :, c][fillable] = total[fillable] / count[fillable]
        holes &= ~fillable
        sweeps += 1
    if holes.any():
        logger.warning("hole fill stopped after %d sweeps with %d holes left", sweeps, int(holes.sum()))
    return Frame(data=np.clip(data, 0.0, 1.0))


def oracle_mask(in1: Frame, in2: Frame, gt: Frame) -> MaskMap:
    """Per-pixel least-squares optimal W in [0, 1] for fusing ``in1`` and ``in2`` toward ``gt``."""
    require_same_size(in1, in2, gt, what="oracle mask inputs")
    diff = in1.data - in2.data
    denominator = np.sum(diff ** 2, axis=2)
    numerator = np.sum((gt.data - in2.data) * diff, axis=2)
    w = np.full(denominator.shape, 0.5)
    nonzero = denominator > 0
    w[nonzero] = np.clip(numerator[nonzero] / denominator[nonzero], 0.0, 1.0)
    return MaskMap(w=w)


def blend_average(f1: Frame, f3: Frame, t: float) -> Frame:
    """Motion-free baseline (1 - t) * f1 + t * f3."""
    return attention_fuse(f1, f3, MaskMap.constant(f1.width, f1.height, 1.0 - t))


def interpolate_detailed(f1: Frame, f3: Frame, t: float = 0.5, params: Optional[FlowParams] = None,
                         flows: Optional[Tuple[FlowField, FlowField]] = None,
                         coverage_threshold: float = DEFAULT_COVERAGE_THRESHOLD) -> InterpolationResult:
    """Flow -> candidates -> contribution mask -> attention fusion -> joint-hole fill."""
    if not 0.0 < t < 1.0:
        raise ValueRangeError(f"t must lie in (0, 1), got {t}")
    require_same_size(f1, f3, what="input frames")
    if f1.channels != f3.channels:
        raise ValueRangeError(f"input frames differ in channels: {f1.channels} vs {f3.channels}")
    if flows is None:
        F13, F31 = estimate_bidirectional(f1, f3, params)
    else:
        F13, F31 = flows
    I1t, H1t, I3t, H3t = synthesize_candidates(f1, f3, F13, F31, t, coverage_threshold)
    w = contribution_mask(I1t, I3t, F13, F31, H1t, H3t, t)
    fused = attention_fuse(I1t, I3t, w)
    joint = HoleMask(h=H1t.h & H3t.h)
    frame = fill_joint_holes(fused, joint)
    logger.debug("interpolate t=%.3f holes1=%d holes3=%d joint=%d", t, H1t.count, H3t.count, joint.count)
    return InterpolationResult(frame, I1t, H1t, I3t, H3t, joint, w, F13, F31)


def interpolate(f1: Frame, f3: Frame, t: float = 0.5, params: Optional[FlowParams] = None,
                flows: Optional[Tuple[FlowField, FlowField]] = None) -> Frame:
    return interpolate_detailed(f1, f3, t, params, flows).frame

"""Whole-frame and saliency-masked quality metrics.

Pixel differences are taken on the 0–255 scale and averaged over channels
before masking:

    IE_M  = sum M(p) * |gen(p) - gt(p)|   / sum M(p)
    MSE_M = sum M(p) * (gen(p) - gt(p))^2 / sum M(p)
    PSNR_M = 10 log10(255^2 / MSE_M)

The Charbonnier penalty stays on the [0, 1] scale, as a training loss would.
"""
import math
from typing import Optional

import numpy as np
from skimage.metrics import structural_similarity

from app.exceptions import DimensionMismatchError, UndefinedRegionError, ValueRangeError
from app.models.imaging import Frame, MaskMap
from app.schemas.schemas import EvalRecord
from app.utils.imaging_utils import require_same_size, to_luma
from app.utils.saliency_utils import complement

PEAK = 255.0
SSIM_SIGMA = 1.5
SSIM_WINDOW = 11
CHARBONNIER_C = 1e-6


def _check_pair(gen: Frame, gt: Frame) -> None:
    require_same_size(gen, gt, what="generated and ground-truth frames")
    if gen.channels != gt.channels:
        raise DimensionMismatchError(f"channel counts differ: {gen.channels} vs {gt.channels}")


def _weights(gen: Frame, mask: Optional[MaskMap]) -> np.ndarray:
    if mask is None:
        return np.ones((gen.height, gen.width))
    require_same_size(gen, mask, what="frame and mask")
    return mask.w


def _masked_mean(per_pixel: np.ndarray, weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        raise UndefinedRegionError("mask sums to zero: region is empty")
    return float(np.sum(weights * per_pixel) / total)


def masked_ie(gen: Frame, gt: Frame, mask: Optional[MaskMap] = None) -> float:
    """Saliency-weighted mean absolute difference (whole frame when mask is None)."""
    _check_pair(gen, gt)
    per_pixel = np.mean(np.abs(gen.data - gt.data) * PEAK, axis=2)
    return _masked_mean(per_pixel, _weights(gen, mask))


def masked_mse(gen: Frame, gt: Frame, mask: Optional[MaskMap] = None) -> float:
    _check_pair(gen, gt)
    per_pixel = np.mean(((gen.data - gt.data) * PEAK) ** 2, axis=2)
    return _masked_mean(per_pixel, _weights(gen, mask))


def psnr_from_mse(mse: float) -> float:
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK ** 2 / mse)


def masked_psnr(gen: Frame, gt: Frame, mask: Optional[MaskMap] = None) -> float:
    """PSNR in dB over the masked region; ``math.inf`` when the masked MSE is 0."""
    return psnr_from_mse(masked_mse(gen, gt, mask))


def psnr(gen: Frame, gt: Frame) -> float:
    return masked_psnr(gen, gt)


def ssim(gen: Frame, gt: Frame) -> float:
    """Mean SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=255."""
    _check_pair(gen, gt)
    if min(gen.width, gen.height) < SSIM_WINDOW:
        raise ValueRangeError(f"image {gen.width}x{gen.height} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    return float(structural_similarity(
        to_luma(gen) * PEAK, to_luma(gt) * PEAK,
        data_range=PEAK, gaussian_weights=True, sigma=SSIM_SIGMA,
        use_sample_covariance=False, K1=0.01, K2=0.03,
    ))


def charbonnier(gen: Frame, gt: Frame, c: float = CHARBONNIER_C, mask: Optional[MaskMap] = None) -> float:
    """Mean of sqrt(d^2 + c) over samples; with a mask, the mask-weighted pixel mean."""
    _check_pair(gen, gt)
    if c <= 0:
        raise ValueRangeError(f"Charbonnier constant must be positive, got {c}")
    penalty = np.sqrt((gen.data - gt.data) ** 2 + c)
    if mask is None:
        return float(penalty.mean())
    return _masked_mean(penalty.mean(axis=2), _weights(gen, mask))


def _region(gen: Frame, gt: Frame, mask: MaskMap):
    try:
        return masked_psnr(gen, gt, mask), masked_ie(gen, gt, mask)
    except UndefinedRegionError:
        return None, None


def evaluate_sample(gen: Frame, gt: Frame, saliency_f: Optional[MaskMap] = None,
                    sample_id: str = "") -> EvalRecord:
    """Whole-frame PSNR/IE/SSIM plus foreground (M_f) and background (1 - M_f) PSNR/IE."""
    _check_pair(gen, gt)
    record = {
        "sample_id": sample_id,
        "psnr": masked_psnr(gen, gt),
        "ie": masked_ie(gen, gt),
        "ssim": ssim(gen, gt),
    }
    if saliency_f is not None:
        record["f_psnr"], record["f_ie"] = _region(gen, gt, saliency_f)
        record["b_psnr"], record["b_ie"] = _region(gen, gt, complement(saliency_f))
    return EvalRecord(**record)

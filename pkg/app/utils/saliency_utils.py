"""Foreground saliency masks: external maps or a spectral-residual baseline.

The background mask is always the soft complement of the foreground one.
"""
import logging
from pathlib import Path
from typing import Tuple, Union

import cv2
import numpy as np

from app.models.imaging import Frame, MaskMap
from app.utils.imaging_utils import box_filter, gaussian_smooth, resize_plane, to_luma
from app.utils.io_utils import load_mask

logger = logging.getLogger(__name__)

SPECTRAL_SIZE = 64
SPECTRAL_SIGMA = 2.5
AMPLITUDE_FLOOR = 1e-8


def load_saliency(path: Union[str, Path], size: Tuple[int, int]) -> MaskMap:
    """Gray saliency image normalized to [0, 1] and resized to (W, H)."""
    return load_mask(path, size)


def spectral_saliency(frame: Frame) -> MaskMap:
    """Spectral-residual saliency of the frame's luma, max-normalized to [0, 1]."""
    luma = to_luma(frame)
    if np.ptp(luma) == 0:
        return MaskMap.constant(frame.width, frame.height, 0.0)
    small = cv2.resize(luma, (SPECTRAL_SIZE, SPECTRAL_SIZE), interpolation=cv2.INTER_AREA)
    if np.ptp(small) == 0:
        return MaskMap.constant(frame.width, frame.height, 0.0)
    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    # relative floor keeps exactly-zero bins finite and the map invariant to intensity scale
    log_amplitude = np.log(amplitude + AMPLITUDE_FLOOR * amplitude.max())
    phase = np.angle(spectrum)
    residual = log_amplitude - box_filter(log_amplitude, 3)
    saliency = np.abs(np.fft.ifft2(np.exp(residual + 1j * phase))) ** 2
    saliency = gaussian_smooth(saliency, SPECTRAL_SIGMA)
    saliency = np.clip(resize_plane(saliency, frame.size), 0.0, None)
    peak = saliency.max()
    if peak <= 0:
        return MaskMap.constant(frame.width, frame.height, 0.0)
    return MaskMap(w=np.clip(saliency / peak, 0.0, 1.0))


def complement(mask: MaskMap) -> MaskMap:
    return MaskMap(w=1.0 - mask.w)


def binarize(mask: MaskMap, threshold: float = 0.5) -> MaskMap:
    return MaskMap(w=(mask.w >= threshold).astype(np.float64))

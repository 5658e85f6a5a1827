from typing import Tuple

import cv2
import numpy as np
from scipy import ndimage

from app.exceptions import DimensionMismatchError
from app.models.imaging import Frame

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def require_same_size(*items, what: str = "inputs") -> Tuple[int, int]:
    """Raise DimensionMismatchError unless every item has the same (width, height)."""
    sizes = {item.size for item in items}
    if len(sizes) != 1:
        raise DimensionMismatchError(f"{what} differ in size: {sorted(sizes)}")
    return items[0].size


def to_luma(frame: Frame) -> np.ndarray:
    """H×W luma plane in [0, 1] (identity for gray frames)."""
    if frame.channels == 1:
        return np.array(frame.data[:, :, 0])
    return np.clip(frame.data @ LUMA_WEIGHTS, 0.0, 1.0)


def bilinear_plane(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a 2-D plane at subpixel (x, y) with clamp-to-edge padding."""
    return ndimage.map_coordinates(plane, [np.asarray(ys, dtype=np.float64), np.asarray(xs, dtype=np.float64)],
                                   order=1, mode="nearest")


def bilinear_image(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample every channel of an H×W×C array; returns xs.shape + (C,)."""
    return np.stack([bilinear_plane(data[:, :, c], xs, ys) for c in range(data.shape[2])], axis=-1)


def sample_bilinear(frame: Frame, x: float, y: float) -> np.ndarray:
    """Per-channel bilinear value of ``frame`` at (x, y); coordinates are clamped to the border."""
    return bilinear_image(frame.data, np.array([x]), np.array([y]))[0]


def resize_plane(plane: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a 2-D float plane to (width, height)."""
    width, height = size
    if plane.shape == (height, width):
        return np.array(plane, dtype=np.float64)
    plane = np.ascontiguousarray(plane, dtype=np.float64)
    return cv2.resize(plane, (width, height), interpolation=cv2.INTER_LINEAR)


def box_filter(plane: np.ndarray, size: int) -> np.ndarray:
    return ndimage.uniform_filter(plane, size=size, mode="nearest")


def gaussian_smooth(plane: np.ndarray, sigma: float) -> np.ndarray:
    return ndimage.gaussian_filter(plane, sigma=sigma, mode="nearest")

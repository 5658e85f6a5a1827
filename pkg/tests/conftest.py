from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from app.models.imaging import Frame
from app.utils.io_utils import save_frame

MIDDLEBURY_SCENES = ["Backyard", "Basketball", "Dumptruck", "Evergreen", "Mequon", "Schefflera",
                     "Urban", "Wooden", "Army", "Grove", "Teddy", "Yosemite"]


def smooth_texture(height: int, width: int, seed: int = 0, sigma: float = 2.0, channels: int = 1) -> np.ndarray:
    """Gaussian-filtered noise rescaled to [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    planes = []
    for _ in range(channels):
        noise = ndimage.gaussian_filter(rng.random((height, width)), sigma, mode="wrap")
        noise = (noise - noise.min()) / (noise.max() - noise.min())
        planes.append(0.1 + 0.8 * noise)
    return np.stack(planes, axis=-1)


def shifted_triplet(height: int = 48, width: int = 48, step: int = 1, seed: int = 0, channels: int = 3,
                    sigma: float = 2.0):
    """Three frames of a texture moving right by ``step`` px per half interval.

    f2(x) = f1(x - step) and f3(x) = f1(x - 2 * step), cropped from one wider image.
    """
    big = smooth_texture(height, width + 2 * step, seed=seed, sigma=sigma, channels=channels)
    f1 = Frame(data=big[:, 2 * step:2 * step + width])
    f2 = Frame(data=big[:, step:step + width])
    f3 = Frame(data=big[:, 0:width])
    return f1, f2, f3


def quantize(data: np.ndarray) -> np.ndarray:
    return np.round(data * 255.0) / 255.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def triplet():
    return shifted_triplet()


@pytest.fixture
def flat_dataset(tmp_path: Path) -> Path:
    """Ten flat-layout triplets with 8-bit-exact frames."""
    root = tmp_path / "flat"
    for i in range(10):
        f1, f2, f3 = shifted_triplet(height=24, width=24, seed=i)
        clip = root / f"clip{i:02d}"
        clip.mkdir(parents=True)
        stems = ("im1", "im2", "im3") if i % 2 == 0 else ("frame1", "frame2", "frame3")
        for stem, frame in zip(stems, (f1, f2, f3)):
            save_frame(frame, clip / f"{stem}.png")
    return root

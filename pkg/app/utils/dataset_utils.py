"""Triplet benchmark discovery, subset sampling and loading.

Scanning collects paths only; pixel data and dimension checks wait for
``load_triplet``. Sample ids are root-relative POSIX paths and manifests
are always sorted by id.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from app.exceptions import DimensionMismatchError, EmptyDatasetError, InputError, ValueRangeError
from app.models.imaging import Frame
from app.schemas.schemas import DatasetManifest, Layout, TripletSample
from app.utils.io_utils import load_frame

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")
VIMEO_FRAMES = ("im1.png", "im2.png", "im3.png")
MIDDLEBURY_INPUTS = ("frame10.png", "frame11.png")
MIDDLEBURY_GT = "frame10i11.png"
FLAT_STEMS = (("im1", "im2", "im3"), ("frame1", "frame2", "frame3"))


def _relative(path: Path, root: Path) -> str:
    return path.relative_to(root).as_posix()


def _read_list_file(list_file: Union[str, Path]) -> List[str]:
    path = Path(list_file)
    if not path.is_file():
        raise InputError(f"list file not found: {path}")
    return [line.strip().strip("/") for line in path.read_text().splitlines() if line.strip()]


def _scan_vimeo(root: Path, list_file: Optional[Union[str, Path]]) -> List[TripletSample]:
    sequences = root / "sequences"
    if list_file is not None:
        clip_dirs = [sequences / entry for entry in _read_list_file(list_file)]
    else:
        clip_dirs = [d for d in sequences.glob("*/*") if d.is_dir()] if sequences.is_dir() else []
    samples = []
    for clip in clip_dirs:
        paths = [clip / name for name in VIMEO_FRAMES]
        if not all(p.is_file() for p in paths):
            logger.warning("skipping incomplete vimeo clip %s", clip)
            continue
        samples.append(TripletSample(
            id=_relative(clip, sequences),
            first=_relative(paths[0], root), middle=_relative(paths[1], root), last=_relative(paths[2], root),
        ))
    return samples


def _scan_middlebury(root: Path) -> List[TripletSample]:
    gt_by_scene: Dict[str, Path] = {}
    for gt in sorted(root.rglob(MIDDLEBURY_GT)):
        gt_by_scene.setdefault(gt.parent.name, gt)
    samples = []
    for first in sorted(root.rglob(MIDDLEBURY_INPUTS[0])):
        scene = first.parent
        last = scene / MIDDLEBURY_INPUTS[1]
        if not last.is_file():
            continue
        middle = scene / MIDDLEBURY_GT
        if not middle.is_file():
            middle = gt_by_scene.get(scene.name)
        if middle is None:
            logger.warning("skipping middlebury scene %s: no %s found", scene, MIDDLEBURY_GT)
            continue
        samples.append(TripletSample(
            id=_relative(scene, root),
            first=_relative(first, root), middle=_relative(middle, root), last=_relative(last, root),
        ))
    return samples


def _flat_triplet(directory: Path) -> Optional[Tuple[Path, Path, Path]]:
    images = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES]
    if len(images) != 3:
        return None
    by_stem = {p.stem: p for p in images}
    for stems in FLAT_STEMS:
        if set(stems) == set(by_stem):
            return tuple(by_stem[s] for s in stems)
    return None


def _scan_flat(root: Path) -> List[TripletSample]:
    samples = []
    for directory in [root, *sorted(d for d in root.rglob("*") if d.is_dir())]:
        if any(child.is_dir() for child in directory.iterdir()):
            continue
        triplet = _flat_triplet(directory)
        if triplet is None:
            continue
        sample_id = _relative(directory, root) if directory != root else directory.name
        samples.append(TripletSample(
            id=sample_id,
            first=_relative(triplet[0], root), middle=_relative(triplet[1], root), last=_relative(triplet[2], root),
        ))
    return samples


def scan_dataset(root: Union[str, Path], layout: Union[Layout, str],
                 list_file: Optional[Union[str, Path]] = None) -> DatasetManifest:
    """Collect the triplets of a benchmark tree, sorted by id."""
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"dataset root is not a directory: {root}")
    try:
        layout = Layout(layout)
    except ValueError:
        raise InputError(f"unknown layout {layout!r}; expected one of {[l.value for l in Layout]}")
    if layout is Layout.vimeo:
        samples = _scan_vimeo(root, list_file)
    elif layout is Layout.middlebury:
        samples = _scan_middlebury(root)
    else:
        samples = _scan_flat(root)
    if not samples:
        raise EmptyDatasetError(f"no {layout.value} triplets found under {root}")
    samples.sort(key=lambda s: s.id)
    logger.info("scanned dataset root=%s layout=%s samples=%d", root, layout.value, len(samples))
    return DatasetManifest(root=str(root), layout=layout, samples=samples)


def subsample(manifest: DatasetManifest, n: int, seed: int) -> DatasetManifest:
    """Uniform sample of ``n`` triplets without replacement.

    Uses numpy's PCG64 generator (``np.random.default_rng(seed)``), so the same
    (manifest, n, seed) always gives the same subset; the result is sorted by id.
    """
    total = len(manifest.samples)
    if not 0 < n <= total:
        raise ValueRangeError(f"subsample size must lie in [1, {total}], got {n}")
    if n == total:
        return manifest
    rng = np.random.default_rng(seed)
    chosen = rng.choice(total, size=n, replace=False)
    samples = sorted((manifest.samples[i] for i in chosen), key=lambda s: s.id)
    return manifest.model_copy(update={"samples": samples})


def attach_saliency(manifest: DatasetManifest, saliency_dir: Union[str, Path]) -> DatasetManifest:
    """Point each sample at ``<saliency_dir>/<id>.png`` when that file exists."""
    saliency_dir = Path(saliency_dir)
    if not saliency_dir.is_dir():
        raise InputError(f"saliency directory not found: {saliency_dir}")
    samples = []
    for sample in manifest.samples:
        candidate = saliency_dir / f"{sample.id}.png"
        if candidate.is_file():
            sample = sample.model_copy(update={"saliency_path": str(candidate.resolve())})
        else:
            logger.warning("no precomputed saliency for sample %s", sample.id)
        samples.append(sample)
    return manifest.model_copy(update={"samples": samples})


def resolve(manifest: DatasetManifest, relative: str) -> Path:
    return Path(manifest.root) / relative


def load_triplet(manifest: DatasetManifest, sample: TripletSample) -> Tuple[Frame, Frame, Frame]:
    frames = tuple(load_frame(resolve(manifest, p)) for p in (sample.first, sample.middle, sample.last))
    shapes = {f.data.shape for f in frames}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"sample {sample.id}: frames differ in shape {sorted(shapes)}")
    return frames


def save_manifest(manifest: DatasetManifest, path: Union[str, Path]) -> None:
    Path(path).write_text(manifest.model_dump_json(indent=2) + "\n")


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"manifest not found: {path}")
    return DatasetManifest.model_validate_json(path.read_text())

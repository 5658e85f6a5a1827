"""Frame, mask and flow persistence.

PNG decoding goes through OpenCV after the IHDR chunk has been checked;
binary PGM/PPM is parsed here so the header's maxval drives normalization.
Flows use the Middlebury ``.flo`` layout: ``PIEH``, little-endian int32
width and height, then row-major interleaved float32 (u, v).
"""
import logging
from pathlib import Path
from typing import Tuple, Union

import cv2
import numpy as np

from app.exceptions import FormatError, InputError
from app.models.imaging import FlowField, Frame, HoleMask, MaskMap
from app.utils.imaging_utils import resize_plane

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PNG_COLOR_TYPES = {0: "gray", 2: "rgb", 3: "palette", 4: "gray+alpha", 6: "rgba"}
FLO_MAGIC = b"PIEH"


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return path.read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e


def _write_bytes(path: PathLike, payload: bytes) -> None:
    try:
        Path(path).write_bytes(payload)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def _png_header(payload: bytes) -> Tuple[int, int]:
    if len(payload) < 33 or payload[12:16] != b"IHDR":
        raise FormatError("truncated PNG: missing IHDR chunk")
    bit_depth, color_type = payload[24], payload[25]
    if bit_depth not in (8, 16):
        raise FormatError(f"unsupported PNG bit depth {bit_depth} (expected 8 or 16)")
    if color_type not in (0, 2, 4, 6):
        name = PNG_COLOR_TYPES.get(color_type, "unknown")
        raise FormatError(f"unsupported PNG color type {color_type} ({name})")
    if b"IEND" not in payload[-12:]:
        raise FormatError("truncated PNG: missing IEND chunk")
    return bit_depth, color_type


def _decode_png(payload: bytes) -> np.ndarray:
    bit_depth, color_type = _png_header(payload)
    raw = cv2.imdecode(np.frombuffer(payload, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError("corrupt PNG: decoder rejected the image data")
    scale = 255.0 if bit_depth == 8 else 65535.0
    if color_type in (0, 4):
        gray = raw if raw.ndim == 2 else raw[:, :, 0]
        return gray.astype(np.float64)[:, :, None] / scale
    rgb = cv2.cvtColor(np.ascontiguousarray(raw[:, :, :3]), cv2.COLOR_BGR2RGB)
    return rgb.astype(np.float64) / scale


def _decode_pnm(payload: bytes) -> np.ndarray:
    """Binary PGM/PPM with samples divided by the header maxval, whatever its value.

    Header and body are parsed by hand so a short file fails with a FormatError
    that names the missing part.
    """
    magic = payload[:2]
    channels = 1 if magic == b"P5" else 3
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(payload) and payload[pos:pos + 1].isspace():
            pos += 1
        if pos < len(payload) and payload[pos:pos + 1] == b"#":
            while pos < len(payload) and payload[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(payload) and not payload[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PNM header")
        tokens.append(payload[start:pos])
    pos += 1
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"malformed PNM header: {tokens}")
    if not 0 < maxval < 65536:
        raise FormatError(f"unsupported PNM maxval {maxval}")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    expected = width * height * channels * dtype.itemsize
    body = payload[pos:pos + expected]
    if len(body) != expected:
        raise FormatError(f"truncated PNM payload: expected {expected} bytes, got {len(body)}")
    samples = np.frombuffer(body, dtype=dtype).astype(np.float64) / maxval
    return np.clip(samples.reshape(height, width, channels), 0.0, 1.0)


def decode_frame(payload: bytes) -> Frame:
    """Decode PNG (8/16-bit gray or RGB, alpha dropped) or binary PGM/PPM bytes."""
    if payload.startswith(PNG_SIGNATURE):
        data = _decode_png(payload)
    elif payload[:2] in (b"P5", b"P6"):
        data = _decode_pnm(payload)
    else:
        raise FormatError("unsupported image format: expected PNG or binary PGM/PPM")
    return Frame(data=data)


def load_frame(path: PathLike) -> Frame:
    try:
        return decode_frame(_read_bytes(path))
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from e


def _to_bytes(data: np.ndarray) -> np.ndarray:
    return np.floor(np.clip(data, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def encode_png(frame: Frame) -> bytes:
    """8-bit PNG bytes; a sample s becomes round-half-up(s * 255)."""
    raw = _to_bytes(frame.data)
    if frame.channels == 1:
        raw = np.ascontiguousarray(raw[:, :, 0])
    else:
        raw = cv2.cvtColor(raw, cv2.COLOR_RGB2BGR)
    ok, buffer = cv2.imencode(".png", raw)
    if not ok:
        raise FormatError("PNG encoder failed")
    return buffer.tobytes()


def save_frame(frame: Frame, path: PathLike) -> None:
    _write_bytes(path, encode_png(frame))


def encode_mask_png(mask: MaskMap) -> bytes:
    return encode_png(Frame(data=mask.w))


def save_mask(mask: MaskMap, path: PathLike) -> None:
    _write_bytes(path, encode_mask_png(mask))


def save_holes(holes: HoleMask, path: PathLike) -> None:
    """Holes as 8-bit gray PNG: 255 = hole, 0 = covered."""
    save_mask(MaskMap(w=holes.h.astype(np.float64)), path)


def mask_from_frame(frame: Frame, size: Tuple[int, int] = None) -> MaskMap:
    """Gray (or luma-averaged) frame to a weight map, bilinearly resized to (W, H) if given."""
    plane = frame.data.mean(axis=2) if frame.channels > 1 else frame.data[:, :, 0]
    if size is not None and plane.shape != (size[1], size[0]):
        plane = resize_plane(plane, size)
    return MaskMap(w=np.clip(plane, 0.0, 1.0))


def load_mask(path: PathLike, size: Tuple[int, int] = None) -> MaskMap:
    return mask_from_frame(load_frame(path), size)


def load_holes(path: PathLike) -> HoleMask:
    return HoleMask(h=load_mask(path).w >= 0.5)


def encode_flo(flow: FlowField) -> bytes:
    header = FLO_MAGIC + np.array([flow.width, flow.height], dtype="<i4").tobytes()
    return header + flow.stacked().astype("<f4").tobytes()


def decode_flo(payload: bytes) -> FlowField:
    if len(payload) < 12:
        raise FormatError("truncated .flo header")
    if payload[:4] != FLO_MAGIC:
        raise FormatError(f"bad .flo magic {payload[:4]!r} (expected b'PIEH')")
    width, height = np.frombuffer(payload[4:12], dtype="<i4")
    if width <= 0 or height <= 0:
        raise FormatError(f"bad .flo dimensions {width}x{height}")
    expected = 12 + int(width) * int(height) * 8
    if len(payload) != expected:
        raise FormatError(f".flo size mismatch: header says {width}x{height} "
                          f"({expected} bytes), file has {len(payload)} bytes")
    data = np.frombuffer(payload[12:], dtype="<f4").astype(np.float64).reshape(int(height), int(width), 2)
    if not np.all(np.isfinite(data)):
        raise FormatError(".flo contains non-finite values")
    return FlowField(u=data[:, :, 0], v=data[:, :, 1])


def save_flo(flow: FlowField, path: PathLike) -> None:
    _write_bytes(path, encode_flo(flow))


def load_flo(path: PathLike) -> FlowField:
    try:
        return decode_flo(_read_bytes(path))
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from e

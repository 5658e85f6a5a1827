"""Immutable image, flow and mask containers.

All arrays are float64 (bool for holes), row-major, indexed ``[y, x]``.
Constructors validate shape and value invariants and freeze the arrays.
"""
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class Frame(_ArrayModel):
    """H×W×C image with samples in [0, 1]; C is 1 or 3."""

    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def check_data(cls, value):
        data = np.asarray(value, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"frame data must be HxW, HxWx1 or HxWx3, got shape {data.shape}")
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise ValueError("frame must not be empty")
        if not np.all(np.isfinite(data)):
            raise ValueError("frame samples must be finite")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError(f"frame samples must lie in [0, 1], got [{data.min()}, {data.max()}]")
        return _frozen(data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def size(self) -> tuple:
        return (self.width, self.height)


class FlowField(_ArrayModel):
    """Per-pixel displacement: pixel p of frame A lands at p + (u, v) in frame B."""

    u: np.ndarray
    v: np.ndarray

    @field_validator("u", "v", mode="before")
    @classmethod
    def check_component(cls, value):
        component = np.asarray(value, dtype=np.float64)
        if component.ndim != 2:
            raise ValueError(f"flow components must be HxW, got shape {component.shape}")
        if not np.all(np.isfinite(component)):
            raise ValueError("flow must be finite (no NaN/Inf)")
        return _frozen(component)

    @model_validator(mode="after")
    def check_shapes(self):
        if self.u.shape != self.v.shape:
            raise ValueError(f"u and v shapes differ: {self.u.shape} vs {self.v.shape}")
        return self

    @classmethod
    def zeros(cls, width: int, height: int) -> "FlowField":
        return cls(u=np.zeros((height, width)), v=np.zeros((height, width)))

    @classmethod
    def uniform(cls, width: int, height: int, u: float, v: float) -> "FlowField":
        return cls(u=np.full((height, width), float(u)), v=np.full((height, width), float(v)))

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def size(self) -> tuple:
        return (self.width, self.height)

    def stacked(self) -> np.ndarray:
        return np.stack([self.u, self.v], axis=-1)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)


class MaskMap(_ArrayModel):
    """H×W weight map in [0, 1]."""

    w: np.ndarray

    @field_validator("w", mode="before")
    @classmethod
    def check_weights(cls, value):
        weights = np.asarray(value, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError(f"mask must be HxW, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise ValueError("mask weights must be finite")
        if weights.size and (weights.min() < 0.0 or weights.max() > 1.0):
            raise ValueError(f"mask weights must lie in [0, 1], got [{weights.min()}, {weights.max()}]")
        return _frozen(weights)

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> "MaskMap":
        return cls(w=np.full((height, width), float(value)))

    @property
    def height(self) -> int:
        return self.w.shape[0]

    @property
    def width(self) -> int:
        return self.w.shape[1]

    @property
    def size(self) -> tuple:
        return (self.width, self.height)


class HoleMask(_ArrayModel):
    """H×W boolean map, True where a warp left no coverage."""

    h: np.ndarray

    @field_validator("h", mode="before")
    @classmethod
    def check_holes(cls, value):
        holes = np.asarray(value, dtype=bool)
        if holes.ndim != 2:
            raise ValueError(f"hole mask must be HxW, got shape {holes.shape}")
        return _frozen(holes)

    @classmethod
    def empty(cls, width: int, height: int) -> "HoleMask":
        return cls(h=np.zeros((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.h.shape[0]

    @property
    def width(self) -> int:
        return self.h.shape[1]

    @property
    def size(self) -> tuple:
        return (self.width, self.height)

    @property
    def count(self) -> int:
        return int(self.h.sum())

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

# Report column order.
METRIC_COLUMNS = ["PSNR", "F-PSNR", "B-PSNR", "IE", "F-IE", "B-IE", "SSIM"]


class FlowParams(BaseModel):
    """Coarse-to-fine Horn–Schunck settings.

    ``smoothness_alpha`` is applied to luma on the 0–255 scale.
    """
    model_config = ConfigDict(frozen=True)

    pyramid_levels: int = Field(4, ge=1)
    downscale_factor: float = Field(0.5, gt=0.0, lt=1.0)
    smoothness_alpha: float = Field(15.0, gt=0.0)
    iterations_per_level: int = Field(100, ge=1)
    presmooth_sigma: float = Field(1.0, ge=0.0)


class Layout(str, Enum):
    vimeo = "vimeo"
    middlebury = "middlebury"
    flat = "flat"


class Method(str, Enum):
    fusion = "fusion"
    average = "average"
    oracle = "oracle"


class EvalRecord(BaseModel):
    """Per-sample quality metrics.

    PSNR values are ``inf`` when the region's MSE is zero; a field is None
    when its saliency region is empty.
    """
    sample_id: str = ""
    psnr: Optional[float] = None
    f_psnr: Optional[float] = None
    b_psnr: Optional[float] = None
    ie: Optional[float] = None
    f_ie: Optional[float] = None
    b_ie: Optional[float] = None
    ssim: Optional[float] = None

    @field_validator("ie", "f_ie", "b_ie", "ssim")
    @classmethod
    def check_finite(cls, value):
        if value is not None and not math.isfinite(value):
            raise ValueError("IE and SSIM values must be finite")
        return value

    @field_validator("psnr", "f_psnr", "b_psnr")
    @classmethod
    def check_psnr(cls, value):
        if value is not None and (math.isnan(value) or value == -math.inf):
            raise ValueError("PSNR must be finite or +inf")
        return value

    def columns(self) -> Dict[str, Optional[float]]:
        return {
            "PSNR": self.psnr,
            "F-PSNR": self.f_psnr,
            "B-PSNR": self.b_psnr,
            "IE": self.ie,
            "F-IE": self.f_ie,
            "B-IE": self.b_ie,
            "SSIM": self.ssim,
        }

    def to_json_dict(self) -> Dict[str, object]:
        """Report column keys; infinite PSNR as the string "inf", undefined as None."""
        return {key: ("inf" if value == math.inf else value) for key, value in self.columns().items()}


class TripletSample(BaseModel):
    id: str
    first: str
    middle: str
    last: str
    saliency_path: Optional[str] = None


class DatasetManifest(BaseModel):
    """Ordered triplet list; paths are relative to ``root``."""
    root: str
    layout: Layout
    samples: List[TripletSample]

    @field_validator("samples")
    @classmethod
    def check_unique_ids(cls, samples):
        ids = [s.id for s in samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique")
        return samples

    def __len__(self) -> int:
        return len(self.samples)


class MetricSummary(BaseModel):
    mean: Optional[float] = None
    count: int = 0
    infinite: int = 0


class BenchSummary(BaseModel):
    method: Method
    layout: Layout
    seed: Optional[int] = None
    limit: Optional[int] = None
    samples: int
    evaluated: int
    failed: List[str] = []
    metrics: Dict[str, MetricSummary]


class HealthStatus(BaseModel):
    status: str = "healthy"

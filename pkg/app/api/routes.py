import logging
from typing import Optional

from fastapi import APIRouter, File, Form, UploadFile
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import Response

from app.schemas.schemas import HealthStatus
from app.utils.fusion_utils import interpolate
from app.utils.io_utils import decode_frame, encode_mask_png, encode_png, mask_from_frame
from app.utils.metrics_utils import evaluate_sample
from app.utils.saliency_utils import binarize as binarize_mask, spectral_saliency

logger = logging.getLogger(__name__)

router = APIRouter()

PNG_MEDIA_TYPE = "image/png"


async def _read_frame(upload: UploadFile):
    return decode_frame(await upload.read())


@router.post("/interpolate")
async def interpolate_frames(first: UploadFile = File(...), last: UploadFile = File(...), t: float = Form(0.5)):
    """
    Synthesizes the frame at time t between two uploaded frames and returns it as PNG.
    """
    f1, f3 = await _read_frame(first), await _read_frame(last)
    frame = await run_in_threadpool(interpolate, f1, f3, t)
    logger.info("api interpolate size=%dx%d t=%.3f", frame.width, frame.height, t)
    return Response(content=encode_png(frame), media_type=PNG_MEDIA_TYPE)


@router.post("/evaluate")
async def evaluate(
    pred: UploadFile = File(...),
    gt: UploadFile = File(...),
    saliency: Optional[UploadFile] = File(None),
    binarize: bool = Form(False),
):
    """
    Returns the quality metrics of a prediction against its ground truth.
    Without an uploaded saliency map the spectral saliency of gt is used.
    """
    generated, truth = await _read_frame(pred), await _read_frame(gt)
    if saliency is not None:
        mask = mask_from_frame(await _read_frame(saliency), truth.size)
    else:
        mask = await run_in_threadpool(spectral_saliency, truth)
    if binarize:
        mask = binarize_mask(mask)
    record = await run_in_threadpool(evaluate_sample, generated, truth, mask, pred.filename or "")
    return record.to_json_dict()


@router.post("/saliency")
async def saliency_map(frame: UploadFile = File(...)):
    mask = await run_in_threadpool(spectral_saliency, await _read_frame(frame))
    return Response(content=encode_mask_png(mask), media_type=PNG_MEDIA_TYPE)


@router.get("/health", response_model=HealthStatus)
async def health_check():
    return HealthStatus()

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional

from tqdm import tqdm

from app.exceptions import VFIError
from app.models.imaging import Frame, MaskMap
from app.schemas.schemas import BenchSummary, DatasetManifest, EvalRecord, FlowParams, Method, TripletSample
from app.utils.dataset_utils import load_triplet
from app.utils.fusion_utils import attention_fuse, blend_average, interpolate_detailed, oracle_mask
from app.utils.metrics_utils import evaluate_sample
from app.utils.report_utils import aggregate
from app.utils.saliency_utils import binarize, load_saliency, spectral_saliency

logger = logging.getLogger(__name__)


class BenchOptions(NamedTuple):
    method: Method = Method.fusion
    params: FlowParams = FlowParams()
    t: float = 0.5
    binarize_saliency: bool = False
    workers: int = 1
    progress: bool = True
    seed: Optional[int] = None
    limit: Optional[int] = None


class BenchResult(NamedTuple):
    records: List[EvalRecord]
    failed: List[str]
    summary: BenchSummary


def synthesize(method: Method, f1: Frame, f3: Frame, gt: Frame, t: float, params: FlowParams) -> Frame:
    if method is Method.average:
        return blend_average(f1, f3, t)
    result = interpolate_detailed(f1, f3, t, params)
    if method is Method.oracle:
        return attention_fuse(result.I1t, result.I3t, oracle_mask(result.I1t, result.I3t, gt))
    return result.frame


def foreground_mask(sample: TripletSample, gt: Frame, binarized: bool) -> MaskMap:
    if sample.saliency_path:
        mask = load_saliency(sample.saliency_path, gt.size)
    else:
        mask = spectral_saliency(gt)
    return binarize(mask) if binarized else mask


def evaluate_triplet(manifest: DatasetManifest, sample: TripletSample, options: BenchOptions) -> EvalRecord:
    f1, gt, f3 = load_triplet(manifest, sample)
    generated = synthesize(options.method, f1, f3, gt, options.t, options.params)
    return evaluate_sample(generated, gt, foreground_mask(sample, gt, options.binarize_saliency), sample.id)


def run_benchmark(manifest: DatasetManifest, options: BenchOptions) -> BenchResult:
    """Evaluate every sample; failures are logged and skipped, results keep manifest order."""
    lock = threading.Lock()
    progress = tqdm(total=len(manifest.samples), desc="bench", unit="sample", disable=not options.progress)

    def run_one(sample: TripletSample) -> Optional[EvalRecord]:
        try:
            return evaluate_triplet(manifest, sample, options)
        except (VFIError, OSError, ValueError) as e:
            logger.error("sample failed id=%s error=%s", sample.id, e)
            return None
        finally:
            with lock:
                progress.update(1)

    with ThreadPoolExecutor(max_workers=max(1, options.workers)) as executor:
        outcomes = list(executor.map(run_one, manifest.samples))
    progress.close()

    records = [r for r in outcomes if r is not None]
    failed = [s.id for s, r in zip(manifest.samples, outcomes) if r is None]
    summary = BenchSummary(
        method=options.method, layout=manifest.layout, seed=options.seed, limit=options.limit,
        samples=len(manifest.samples), evaluated=len(records), failed=failed, metrics=aggregate(records),
    )
    logger.info("bench finished samples=%d evaluated=%d failed=%d", summary.samples, summary.evaluated, len(failed))
    return BenchResult(records, failed, summary)

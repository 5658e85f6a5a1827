import csv
import io
import math
from typing import Dict, List, Optional

from app.schemas.schemas import METRIC_COLUMNS, BenchSummary, EvalRecord, MetricSummary

PSNR_COLUMNS = {"PSNR", "F-PSNR", "B-PSNR"}


def aggregate(records: List[EvalRecord]) -> Dict[str, MetricSummary]:
    """Arithmetic mean per column; undefined values skipped, infinite PSNRs counted apart."""
    summary = {}
    for column in METRIC_COLUMNS:
        values = [r.columns()[column] for r in records]
        finite = [v for v in values if v is not None and math.isfinite(v)]
        infinite = sum(1 for v in values if v is not None and math.isinf(v))
        mean = math.fsum(finite) / len(finite) if finite else None
        summary[column] = MetricSummary(mean=mean, count=len(finite), infinite=infinite)
    return summary


def _csv_value(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def render_csv(records: List[EvalRecord], summary: Dict[str, MetricSummary]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", *METRIC_COLUMNS])
    for record in records:
        columns = record.columns()
        writer.writerow([record.sample_id, *(_csv_value(columns[c]) for c in METRIC_COLUMNS)])
    writer.writerow(["mean", *(_csv_value(summary[c].mean) for c in METRIC_COLUMNS)])
    return buffer.getvalue()


def format_metric(column: str, value: Optional[float]) -> str:
    """Report formatting: dB and IE with two decimals, SSIM with four."""
    if value is None:
        return "-"
    if math.isinf(value):
        return "inf"
    return f"{value:.4f}" if column == "SSIM" else f"{value:.2f}"


def render_markdown(bench: BenchSummary, title: str) -> str:
    header = "| Method | " + " | ".join(f"{c} ({'↓' if 'IE' in c else '↑'})" for c in METRIC_COLUMNS) + " |"
    rule = "|---" * (len(METRIC_COLUMNS) + 1) + "|"
    row = f"| {bench.method.value} | " + " | ".join(
        format_metric(c, bench.metrics[c].mean) for c in METRIC_COLUMNS) + " |"
    lines = [f"# {title}", "", header, rule, row, ""]
    lines.append(f"- layout: {bench.layout.value}")
    lines.append(f"- samples: {bench.samples} (evaluated {bench.evaluated}, failed {len(bench.failed)})")
    if bench.seed is not None:
        lines.append(f"- subset: limit={bench.limit} seed={bench.seed}")
    for column in sorted(PSNR_COLUMNS, key=METRIC_COLUMNS.index):
        if bench.metrics[column].infinite:
            lines.append(f"- {column}: {bench.metrics[column].infinite} infinite values excluded from the mean")
    if bench.failed:
        lines.append("- failed samples: " + ", ".join(bench.failed))
    return "\n".join(lines) + "\n"

"""Dataset evaluation and report files."""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from evaluation.calibration import ause, uncertainty_error_correlation
from evaluation.metrics import psnr, ssim
from evaluation.timing import time_inference
from model import UMFFNet
from rain_data import PairedSample

logger = logging.getLogger(__name__)

CSV_HEADER = ["identifier", "psnr", "ssim", "spearman", "ause", "time_ms"]
SSIM_NOTE = "ssim uses luma, 11x11 gaussian window, sigma 1.5; not comparable to published decimals"


@dataclass
class ImageResult:
    identifier: str
    psnr: float
    ssim: float
    spearman: float | None
    ause: float | None
    time_ms: float


@dataclass
class EvalReport:
    """Per-image rows plus aggregates (mean PSNR/SSIM, median time)."""

    rows: list[ImageResult] = field(default_factory=list)
    input_psnr: float = math.nan

    @property
    def mean_psnr(self) -> float:
        return float(np.mean([row.psnr for row in self.rows])) if self.rows else math.nan

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([row.ssim for row in self.rows])) if self.rows else math.nan

    @property
    def mean_spearman(self) -> float | None:
        values = [row.spearman for row in self.rows if row.spearman is not None]
        return float(np.mean(values)) if values else None

    @property
    def mean_ause(self) -> float | None:
        values = [row.ause for row in self.rows if row.ause is not None]
        return float(np.mean(values)) if values else None

    @property
    def median_time_ms(self) -> float:
        return float(np.median([row.time_ms for row in self.rows])) if self.rows else math.nan

    def summary(self) -> dict[str, str]:
        """Aggregate key=value fields."""
        return {
            "images": str(len(self.rows)),
            "psnr": _format(self.mean_psnr),
            "input_psnr": _format(self.input_psnr),
            "ssim": _format(self.mean_ssim),
            "spearman": _format(self.mean_spearman),
            "ause": _format(self.mean_ause),
            "time_ms_median": _format(self.median_time_ms),
            "note": SSIM_NOTE,
        }


def _format(value: float | None) -> str:
    if value is None:
        return "degenerate"
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def write_text_report(report: EvalReport, path: str | Path) -> Path:
    """Aggregates then one line per image, all key=value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={value}" for key, value in report.summary().items()]
    for row in report.rows:
        fields = [f"identifier={row.identifier}"]
        fields += [f"{name}={_format(getattr(row, name))}" for name in CSV_HEADER[1:]]
        lines.append(" ".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_csv_report(report: EvalReport, path: str | Path) -> Path:
    """Per-image table with the fixed header ``identifier,psnr,ssim,spearman,ause,time_ms``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in report.rows:
            writer.writerow([row.identifier] + [_format(getattr(row, name)) for name in CSV_HEADER[1:]])
    return path


def evaluate(
    model: UMFFNet,
    samples: Sequence[PairedSample],
    repeats: int | None = None,
    show_progress: bool = True,
) -> EvalReport:
    """
    Score a model on full-size pairs.

    Each image is derained once for the metrics (clamped output) and timed
    separately with :func:`time_inference`.
    """
    report = EvalReport()
    input_scores = []
    for sample in tqdm(samples, desc="Evaluating", disable=not show_progress):
        output = model.forward(sample.rainy[None])
        derained = output.export()[0][0]
        spearman = None
        area = None
        if output.uncertainty is not None:
            # Per-pixel error averaged over colour channels matches the 1-channel uncertainty map
            abs_error = np.abs(derained - sample.clean).mean(axis=0)
            spearman = uncertainty_error_correlation(output.uncertainty[0, 0], abs_error)
            area = ause(output.uncertainty[0, 0], abs_error)
        timing = time_inference(model, sample.rainy, repeats)
        report.rows.append(
            ImageResult(
                identifier=sample.identifier,
                psnr=psnr(derained, sample.clean),
                ssim=ssim(derained, sample.clean),
                spearman=spearman,
                ause=area,
                time_ms=timing.median * 1e3,
            )
        )
        input_scores.append(psnr(sample.rainy, sample.clean))
    report.input_psnr = float(np.mean(input_scores)) if input_scores else math.nan
    logger.info(f"Evaluated {len(report.rows)} images: psnr={_format(report.mean_psnr)} ssim={_format(report.mean_ssim)}")
    return report

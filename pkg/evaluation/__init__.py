"""Image quality, uncertainty calibration and timing metrics."""
from evaluation.calibration import (
    ause,
    oracle_curve,
    random_sparsification_curve,
    sparsification_curve,
    uncertainty_error_correlation,
)
from evaluation.metrics import gaussian_window, psnr, ssim, to_luma
from evaluation.report import CSV_HEADER, EvalReport, ImageResult, evaluate, write_csv_report, write_text_report
from evaluation.timing import TimingStats, time_inference

__all__ = [
    "psnr",
    "ssim",
    "to_luma",
    "gaussian_window",
    "uncertainty_error_correlation",
    "sparsification_curve",
    "oracle_curve",
    "random_sparsification_curve",
    "ause",
    "time_inference",
    "TimingStats",
    "EvalReport",
    "ImageResult",
    "CSV_HEADER",
    "evaluate",
    "write_text_report",
    "write_csv_report",
]

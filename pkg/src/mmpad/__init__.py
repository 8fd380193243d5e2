"""Multidimensional matrix-profile anomaly detection.

The pipeline turns an n x d series into a length-n anomaly score vector:
per-channel z-normalized subsequence distances, largest-first dimensional
aggregation, exclusion-zone-aware k-nearest-neighbor retrieval, and
back-fill plus moving-average post-processing. Larger scores mean more
anomalous behavior.
"""

from .detector import (
    DetectionResult,
    DetectorConfig,
    estimate_period,
    fit_budget,
    interpolate_scores,
    run_detector,
    score,
)
from .errors import (
    InsufficientDataError,
    LabelError,
    MetricError,
    MmpadError,
    ParameterError,
    SeriesFormatError,
    SeriesParseError,
    WindowError,
)
from .io import (
    TimeSeries,
    read_csv,
    read_scores,
    write_csv,
    write_scores,
    zscore_normalize,
)
from .knn import ProfileTensor, arg_select, build_profile, find_knn_row
from .metrics import (
    EvalReport,
    auc_pr,
    auc_roc,
    rank_table,
    smooth_labels,
    vus_pr,
    vus_roc,
)
from .postprocess import reduce_profile, resolve_cutoff, smooth
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "DetectionResult",
    "DetectorConfig",
    "EvalReport",
    "InsufficientDataError",
    "LabelError",
    "MetricError",
    "MmpadError",
    "ParameterError",
    "ProfileTensor",
    "SeriesFormatError",
    "SeriesParseError",
    "SynthConfig",
    "TimeSeries",
    "WindowError",
    "arg_select",
    "auc_pr",
    "auc_roc",
    "build_profile",
    "estimate_period",
    "find_knn_row",
    "fit_budget",
    "generate",
    "interpolate_scores",
    "rank_table",
    "read_csv",
    "read_scores",
    "reduce_profile",
    "resolve_cutoff",
    "run_detector",
    "score",
    "smooth",
    "smooth_labels",
    "vus_pr",
    "vus_roc",
    "write_csv",
    "write_scores",
    "zscore_normalize",
]

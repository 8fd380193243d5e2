"""End-to-end scoring: normalization, window inference, budget-aware
downsampling, profile construction, reduction, smoothing, and score
re-interpolation back to the input length.

Normalization runs before window inference (the ACF peak locations are
scale-invariant, so the order is observationally safe and fixed for
determinism). The runtime budget is an abstract proxy cost, n_sub^2 * d,
so budget decisions never depend on the machine.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, WindowError
from .io import TimeSeries, zscore_normalize
from .knn import build_profile
from .postprocess import reduce_profile, resolve_cutoff, smooth

DEFAULT_BUDGET = 2e10

ACF_MAX_LAG = 400
PERIOD_RANGE = (4, 300)
FALLBACK_PERIOD = 125
# ACF local maxima below this height are noise, not periods; without the
# qualifier a featureless series would return an arbitrary noise lag.
MIN_PEAK_HEIGHT = 0.1


@dataclass
class DetectorConfig:
    """Detector settings.

    ``window`` is an explicit subsequence length or "auto" (inferred from
    the first channel). ``dim_cutoff`` is an integer number of profile
    dimensions or a fraction in (0, 1) of the channel count. ``budget`` is
    the proxy-cost ceiling for downsampling, or None to disable it.
    """

    window: int | str = "auto"
    k: int = 1
    dim_cutoff: float = 1.0
    aggregation: str = "pre"
    budget: float | None = DEFAULT_BUDGET
    normalize: bool = True
    threads: int | str = "auto"

    def __post_init__(self):
        if isinstance(self.window, str):
            if self.window != "auto":
                raise ParameterError(f"window must be an integer or 'auto', got {self.window!r}")
        elif self.window < 3:
            raise ParameterError(f"explicit window must be >= 3, got {self.window}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.dim_cutoff <= 0:
            raise ParameterError(f"dim_cutoff must be positive, got {self.dim_cutoff}")
        if self.aggregation not in ("pre", "post"):
            raise ParameterError(
                f"aggregation must be 'pre' or 'post', got {self.aggregation!r}"
            )
        if self.budget is not None and self.budget <= 0:
            raise ParameterError(f"budget must be positive or None, got {self.budget}")
        if isinstance(self.threads, str):
            if self.threads != "auto":
                raise ParameterError(f"threads must be an integer or 'auto', got {self.threads!r}")
        elif self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")


@dataclass
class DetectionResult:
    scores: np.ndarray
    window: int
    ell_ex: int
    dim_cutoff: int
    factor: int
    over_budget: bool


def estimate_period(channel: np.ndarray) -> int:
    """Dominant period of a channel from its autocorrelation function.

    Looks for the highest qualifying local ACF maximum (strictly above both
    neighbors and above MIN_PEAK_HEIGHT) at lags in [4, min(n//2, 400) - 1];
    returns it when it falls inside PERIOD_RANGE, otherwise FALLBACK_PERIOD.
    """
    x = np.asarray(channel, dtype=np.float64).ravel()
    n = x.size
    if n < 8:
        warnings.warn(
            f"series of length {n} too short for period estimation; "
            f"falling back to {FALLBACK_PERIOD}"
        )
        return FALLBACK_PERIOD
    max_lag = min(n // 2, ACF_MAX_LAG)
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    if denom <= 0.0:
        return FALLBACK_PERIOD
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for lag in range(1, max_lag + 1):
        acf[lag] = float(np.dot(centered[:-lag], centered[lag:])) / denom

    lo = PERIOD_RANGE[0]
    if max_lag - 1 < lo:
        return FALLBACK_PERIOD
    lags = np.arange(lo, max_lag)
    is_peak = (
        (acf[lags] > acf[lags - 1])
        & (acf[lags] > acf[lags + 1])
        & (acf[lags] > MIN_PEAK_HEIGHT)
    )
    peaks = lags[is_peak]
    if peaks.size == 0:
        return FALLBACK_PERIOD
    best = int(peaks[np.argmax(acf[peaks])])
    if not PERIOD_RANGE[0] <= best <= PERIOD_RANGE[1]:
        return FALLBACK_PERIOD
    return best


@dataclass
class BudgetFit:
    series: TimeSeries
    window: int
    factor: int
    over_budget: bool


def proxy_cost(n: int, m: int, d: int) -> float:
    """Runtime proxy: quadratic in subsequence count, linear in channels."""
    return float(max(n - m + 1, 0)) ** 2 * d


def fit_budget(ts: TimeSeries, m: int, budget: float) -> BudgetFit:
    """Halve the series (keep even timestamps) until the proxy cost fits.

    The window is re-inferred on the downsampled first channel after every
    halving. Stops early once another halving would leave n < 4m; the
    over_budget flag reports whether the final cost still exceeds the budget.
    """
    if budget <= 0:
        raise ParameterError(f"budget must be positive, got {budget}")
    series = ts
    window = m
    factor = 1
    cost = proxy_cost(series.n, window, series.d)
    while cost > budget and series.n >= 4 * window:
        series = TimeSeries(
            series.values[::2],
            list(series.channel_names),
            None if series.labels is None else series.labels[::2],
        )
        window = estimate_period(series.values[:, 0])
        factor *= 2
        cost = proxy_cost(series.n, window, series.d)
    return BudgetFit(series, window, factor, over_budget=cost > budget)


def interpolate_scores(y_working: np.ndarray, factor: int, n: int) -> np.ndarray:
    """Linearly interpolate working scores back to the original length.

    Working score j is anchored at original timestamp j*factor; timestamps
    beyond the last anchor hold the last value.
    """
    y_working = np.asarray(y_working, dtype=np.float64).ravel()
    if factor < 1:
        raise ParameterError(f"factor must be >= 1, got {factor}")
    expected = -(-n // factor)  # ceil(n / factor): the kept-timestamp count
    if y_working.size != expected:
        raise ParameterError(
            f"working scores have length {y_working.size}, expected "
            f"ceil({n}/{factor}) = {expected}"
        )
    if factor == 1:
        return y_working.copy()
    anchors = np.arange(y_working.size, dtype=np.float64) * factor
    return np.interp(np.arange(n, dtype=np.float64), anchors, y_working)


def _resolve_threads(threads: int | str) -> int:
    if threads == "auto":
        return os.cpu_count() or 1
    return int(threads)


def run_detector(ts: TimeSeries, cfg: DetectorConfig | None = None) -> DetectionResult:
    """Score ``ts`` and report the resolved window, cutoff, and budget factor."""
    cfg = cfg or DetectorConfig()
    work = zscore_normalize(ts) if cfg.normalize else ts
    window = cfg.window if isinstance(cfg.window, int) else estimate_period(work.values[:, 0])
    if work.n < 2 * window:
        raise WindowError(
            f"series too short: need n >= 2*m, got n={work.n} with window m={window}"
        )
    factor = 1
    over_budget = False
    if cfg.budget is not None:
        fit = fit_budget(work, window, cfg.budget)
        work, window, factor, over_budget = fit.series, fit.window, fit.factor, fit.over_budget
        if work.n < 2 * window:
            raise WindowError(
                f"downsampled series too short: n={work.n} with window m={window}"
            )

    profile = build_profile(
        work, window, cfg.k, cfg.aggregation, threads=_resolve_threads(cfg.threads)
    )
    dim_cutoff = resolve_cutoff(cfg.dim_cutoff, work.d)
    scores = smooth(reduce_profile(profile.values, dim_cutoff, cfg.k), window)
    finite = np.isfinite(scores)
    if not finite.all():
        scores[~finite] = scores[finite].min() if finite.any() else 0.0
    scores = interpolate_scores(scores, factor, ts.n)
    return DetectionResult(
        scores=scores,
        window=window,
        ell_ex=profile.ell_ex,
        dim_cutoff=dim_cutoff,
        factor=factor,
        over_budget=over_budget,
    )


def score(ts: TimeSeries, cfg: DetectorConfig | None = None) -> np.ndarray:
    """Length-n anomaly scores for ``ts``; larger means more anomalous."""
    return run_detector(ts, cfg).scores

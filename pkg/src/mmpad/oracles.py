"""Brute-force reference implementations used to validate the fast pipeline.

Everything here favors transparency over speed: full distance rows are
materialized, windows are z-normalized explicitly, neighbor selection is the
literal repeated-minimum-with-masking procedure, and post-processing is a
line-by-line transcription with plain loops. Tie-breaks and constant-window
rules match the fast path exactly so equivalence tests can demand identical
indices.

Sizes are guarded so an accidental call on benchmark-scale data fails fast.
"""

from __future__ import annotations

import warnings

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .distance import CONSTANT_STD_FACTOR
from .errors import ParameterError, WindowError
from .io import TimeSeries, zscore_normalize
from .knn import MISSING_INDEX, ProfileTensor

MAX_ORACLE_LENGTH = 5000


def knn_row_bruteforce(row, k: int, ell_ex: int) -> tuple[np.ndarray, np.ndarray]:
    """Repeated minimum with exclusion masking after every acceptance.

    np.argmin returns the first occurrence of the minimum, which is exactly
    the smaller-index tie-break the fast path uses.
    """
    if k < 1 or ell_ex < 1:
        raise ParameterError("k and ell_ex must be >= 1")
    work = np.array(row, dtype=np.float64)
    n_ref = work.size
    out_idx = np.full(k, MISSING_INDEX, dtype=np.int64)
    out_val = np.full(k, np.nan)
    for slot in range(k):
        j = int(np.argmin(work))
        value = work[j]
        if not np.isfinite(value):
            break
        out_idx[slot] = j
        out_val[slot] = value
        work[max(0, j - ell_ex) : j + ell_ex + 1] = np.inf
    return out_idx, out_val


def znorm_windows(channel: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Explicitly z-normalized windows of one channel plus a constant mask."""
    windows = sliding_window_view(np.asarray(channel, dtype=np.float64), m)
    mu = windows.mean(axis=1)
    sd = windows.std(axis=1)
    const = sd <= CONSTANT_STD_FACTOR * np.maximum(1.0, np.abs(mu))
    safe = np.where(const, 1.0, sd)
    normalized = np.where(const[:, None], 0.0, (windows - mu[:, None]) / safe[:, None])
    return normalized, const


def distance_matrix_bruteforce(ts: TimeSeries, m: int) -> np.ndarray:
    """Full (n_sub, n_sub, d) tensor of pairwise z-normalized distances."""
    if ts.n > MAX_ORACLE_LENGTH:
        raise ParameterError(
            f"oracle guard: n={ts.n} exceeds {MAX_ORACLE_LENGTH}"
        )
    if not 2 <= m <= ts.n:
        raise WindowError(f"window length {m} invalid for n={ts.n}")
    n_sub = ts.n - m + 1
    dists = np.empty((n_sub, n_sub, ts.d))
    root_2m = np.sqrt(2.0 * m)
    for c in range(ts.d):
        normalized, const = znorm_windows(ts.values[:, c], m)
        for i in range(n_sub):
            diff = normalized - normalized[i]
            column = np.sqrt(np.sum(diff * diff, axis=1))
            column[const != const[i]] = root_2m  # exactly one window constant
            column[const & const[i]] = 0.0
            dists[i, :, c] = column
    return dists


def _descending_cummean(row: np.ndarray) -> np.ndarray:
    srt = -np.sort(-row)
    return np.cumsum(srt) / np.arange(1.0, row.size + 1.0)


def brute_force_profile(ts: TimeSeries, m: int, k: int, mode: str = "pre") -> ProfileTensor:
    """Reference profile tensor: full rows, explicit z-normalization,
    sort-based aggregation, repeated-minimum neighbor selection."""
    if mode not in ("pre", "post"):
        raise ParameterError(f"mode must be 'pre' or 'post', got {mode!r}")
    if ts.n < 2 * m:
        raise WindowError(f"series too short: need n >= 2*m, got n={ts.n}, m={m}")
    n_sub = ts.n - m + 1
    if not 1 <= k < n_sub:
        raise ParameterError(f"k={k} must be in [1, {n_sub})")
    ell_ex = m // 2
    d = ts.d
    dists = distance_matrix_bruteforce(ts, m)
    for i in range(n_sub):
        dists[i, max(0, i - ell_ex) : i + ell_ex + 1, :] = np.inf

    values = np.full((n_sub, d, k), np.nan)
    indices = np.full((n_sub, d, k), MISSING_INDEX, dtype=np.int64)
    if mode == "pre":
        for i in range(n_sub):
            agg = np.empty((n_sub, d))
            for j in range(n_sub):
                agg[j] = _descending_cummean(dists[i, j])
            for p in range(d):
                idx, val = knn_row_bruteforce(agg[:, p], k, ell_ex)
                indices[i, p, :] = idx
                values[i, p, :] = val
    else:
        ch_values = np.full((n_sub, d, k), np.nan)
        ch_indices = np.full((n_sub, d, k), MISSING_INDEX, dtype=np.int64)
        for i in range(n_sub):
            for c in range(d):
                idx, val = knn_row_bruteforce(dists[i, :, c], k, ell_ex)
                ch_indices[i, c, :] = idx
                ch_values[i, c, :] = val
        for i in range(n_sub):
            for l in range(k):
                row = ch_values[i, :, l]
                order = np.argsort(-row, kind="stable")
                values[i, :, l] = np.cumsum(row[order]) / np.arange(1.0, d + 1.0)
                indices[i, :, l] = ch_indices[i, order, l]
    return ProfileTensor(values=values, indices=indices, m=m, ell_ex=ell_ex, mode=mode)


def backfill_reference(values: np.ndarray, d_star: int, k_star: int) -> np.ndarray:
    """Literal loop transcription of the dimension/neighbor back-fill."""
    p = np.array(values[:, :d_star, :k_star], dtype=np.float64)
    n_sub = p.shape[0]
    for di in range(1, d_star):
        for i in range(n_sub):
            for l in range(k_star):
                if not np.isfinite(p[i, di, l]):
                    p[i, di, l] = p[i, di - 1, l]
    s = p[:, d_star - 1, :]
    for l in range(1, k_star):
        for i in range(n_sub):
            if not np.isfinite(s[i, l]):
                s[i, l] = s[i, l - 1]
    return s[:, k_star - 1].copy()


def smooth_reference(s: np.ndarray, m: int) -> np.ndarray:
    """Literal NaN-pad + per-window NaN-mean smoothing."""
    s = np.asarray(s, dtype=np.float64).ravel()
    padded = np.concatenate([np.full(m - 1, np.nan), s, np.full(m - 1, np.nan)])
    n = s.size + m - 1
    out = np.empty(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN windows
        for t in range(n):
            out[t] = np.nanmean(padded[t : t + m])
    return out


def brute_force_pipeline(ts: TimeSeries, cfg) -> np.ndarray:
    """End-to-end reference scores (budget-aware downsampling not applied;
    compare against the detector with the budget disabled)."""
    from .detector import estimate_period
    from .postprocess import resolve_cutoff

    work = zscore_normalize(ts) if cfg.normalize else ts
    m = cfg.window if isinstance(cfg.window, int) else estimate_period(work.values[:, 0])
    profile = brute_force_profile(work, m, cfg.k, cfg.aggregation)
    d_star = resolve_cutoff(cfg.dim_cutoff, work.d)
    scores = smooth_reference(backfill_reference(profile.values, d_star, cfg.k), m)
    finite = np.isfinite(scores)
    if not finite.all():
        scores[~finite] = scores[finite].min() if finite.any() else 0.0
    return scores

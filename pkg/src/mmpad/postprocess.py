"""Profile-tensor reduction to a timestamp-level anomaly score.

The tensor stores aggregated distances throughout, so larger already means
more anomalous and no sign flip happens here. Missing entries (exclusion
zones can leave fewer than k valid neighbors) are back-filled from the
preceding profile dimension, then from the preceding neighbor order; a gap
survives only if its entire back-fill chain is missing.

Smoothing pads the subsequence scores with m-1 NaNs on each side and takes
the mean of the finite values in every length-m window, which makes each
timestamp score the mean of the subsequence scores whose windows cover it
and restores the input length n.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParameterError, WindowError

# Rows of the padded window view processed per block, to bound peak memory.
_SMOOTH_BLOCK = 65536


def resolve_cutoff(raw: float, d: int) -> int:
    """Resolve a dimension cutoff that is either an integer or a fraction.

    Values >= 1 must be integers and at most d; fractions in (0, 1) are
    multiplied by d and ceiled, with a floor of 1.
    """
    if d < 1:
        raise ParameterError(f"dimension count must be >= 1, got {d}")
    if raw <= 0:
        raise ParameterError(f"dimension cutoff must be positive, got {raw}")
    if raw >= 1:
        if raw != int(raw):
            raise ParameterError(
                f"dimension cutoff >= 1 must be an integer, got {raw}"
            )
        cutoff = int(raw)
        if cutoff > d:
            raise ParameterError(f"dimension cutoff {cutoff} exceeds {d} dimensions")
        return cutoff
    return max(1, math.ceil(raw * d))


def reduce_profile(values: np.ndarray, d_star: int, k_star: int) -> np.ndarray:
    """Reduce an (n_sub, d, k) tensor to per-subsequence scores.

    Restricts to the first ``d_star`` dimensions and ``k_star`` neighbors,
    back-fills non-finite entries dimension-by-dimension (each slice copies
    from the already back-filled one before it) and then neighbor-by-
    neighbor, and returns the column at (d_star, k_star).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3:
        raise ParameterError("profile values must be a 3-D tensor")
    _, d, k = values.shape
    if not 1 <= d_star <= d:
        raise ParameterError(f"d_star must be in [1, {d}], got {d_star}")
    if not 1 <= k_star <= k:
        raise ParameterError(f"k_star must be in [1, {k}], got {k_star}")

    p = values[:, :d_star, :k_star].copy()
    for di in range(1, d_star):
        gaps = ~np.isfinite(p[:, di, :])
        p[:, di, :][gaps] = p[:, di - 1, :][gaps]
    s = p[:, d_star - 1, :].copy()
    for l in range(1, k_star):
        gaps = ~np.isfinite(s[:, l])
        s[gaps, l] = s[gaps, l - 1]
    return s[:, k_star - 1].copy()


def smooth(s: np.ndarray, m: int) -> np.ndarray:
    """NaN-padded moving average mapping n_sub subsequence scores to n = n_sub + m - 1.

    A window with no finite value yields NaN.
    """
    s = np.asarray(s, dtype=np.float64).ravel()
    if m < 1:
        raise WindowError(f"window length must be >= 1, got {m}")
    if s.size < 1:
        raise ParameterError("subsequence scores must be non-empty")
    if m == 1:
        return s.copy()
    pad = np.full(m - 1, np.nan)
    padded = np.concatenate([pad, s, pad])
    windows = sliding_window_view(padded, m)
    n = windows.shape[0]
    out = np.empty(n)
    for a in range(0, n, _SMOOTH_BLOCK):
        block = windows[a : a + _SMOOTH_BLOCK]
        sums = np.nansum(block, axis=1)
        counts = np.sum(np.isfinite(block), axis=1)
        out[a : a + _SMOOTH_BLOCK] = np.where(
            counts > 0, sums / np.maximum(counts, 1), np.nan
        )
    return out

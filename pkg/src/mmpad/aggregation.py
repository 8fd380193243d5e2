"""Dimension-wise aggregation of per-pair channel distances.

Both strategies sort the d channel values of each row in descending order
(most deviant channel first) and take cumulative means, so column p holds
the mean of the p largest entries. Pre-sorting applies this per subsequence
pair before neighbor selection; post-sorting applies it to per-channel
profile values after neighbors are already fixed. Column 1 is therefore
sensitive to an anomaly confined to a single channel, and column d is the
plain all-channel mean regardless of ordering.
"""

from __future__ import annotations

import numpy as np


def sorted_cummean_desc(mat: np.ndarray) -> np.ndarray:
    """Descending sort of each row followed by cumulative means.

    +inf rows stay +inf across all columns (masked references); NaN entries
    sort to the end, so column p is finite only while at least p finite
    values exist in the row.
    """
    mat = np.asarray(mat, dtype=np.float64)
    srt = np.negative(mat)
    srt.sort(axis=1)
    np.negative(srt, out=srt)
    np.cumsum(srt, axis=1, out=srt)
    srt /= np.arange(1.0, mat.shape[1] + 1.0)
    return srt


def argsorted_cummean_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`sorted_cummean_desc` but also returns the column order.

    The sort is stable, so ties keep the smaller original column first.
    """
    mat = np.asarray(mat, dtype=np.float64)
    order = np.argsort(-mat, axis=1, kind="stable")
    srt = np.take_along_axis(mat, order, axis=1)
    cum = np.cumsum(srt, axis=1) / np.arange(1.0, mat.shape[1] + 1.0)
    return cum, order


def presort_aggregate(dists: np.ndarray) -> np.ndarray:
    """Aggregate one distance row (n_ref, d) across channels, largest first."""
    return sorted_cummean_desc(dists)


def postsort_aggregate(per_dim_profiles: np.ndarray) -> np.ndarray:
    """Aggregate per-channel profile values (n_sub, d), largest first."""
    return sorted_cummean_desc(per_dim_profiles)

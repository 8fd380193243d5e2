"""Sliding z-normalized Euclidean distances between subsequences.

The row kernel computes, for one query subsequence, its distance to every
reference subsequence on every channel. Distances use the correlation
identity ``dist = sqrt(max(0, 2m(1 - rho)))`` with ``rho`` the Pearson
correlation of the two windows; the clamp absorbs floating-point negatives.
Zero-variance windows get fixed limits: two constant windows are at distance
0, a constant window paired with a non-constant one is at ``sqrt(2m)``
(``rho`` treated as 0).

``build_profile`` consumes rows through :func:`chunk_distance_rows`, which
streams dot products within fixed-size chunks. The chunk grid never depends
on the worker count, so every row's arithmetic is identical no matter how
the chunks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, WindowError
from .io import TimeSeries

# A window counts as constant when std <= this factor * max(1, |mean|).
CONSTANT_STD_FACTOR = 1e-12

# Queries per streaming chunk; fixed so results never depend on threading.
ROW_CHUNK = 256


@dataclass
class SlidingStats:
    """Per-window means and population stds for every channel.

    ``means`` and ``stds`` have shape (n_sub, d) with n_sub = n - m + 1.
    """

    means: np.ndarray
    stds: np.ndarray
    m: int

    @property
    def n_sub(self) -> int:
        return self.means.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def constant(self) -> np.ndarray:
        """Boolean (n_sub, d) mask of windows treated as constant."""
        return self.stds <= CONSTANT_STD_FACTOR * np.maximum(1.0, np.abs(self.means))


def compute_sliding_stats(ts: TimeSeries, m: int) -> SlidingStats:
    """Window means and population stds via cumulative sums."""
    if m < 1:
        raise WindowError(f"window length must be >= 1, got {m}")
    if m > ts.n:
        raise WindowError(f"window length {m} exceeds series length {ts.n}")
    v = ts.values
    zeros = np.zeros((1, ts.d))
    csum = np.concatenate([zeros, np.cumsum(v, axis=0)])
    csq = np.concatenate([zeros, np.cumsum(v * v, axis=0)])
    wsum = csum[m:] - csum[:-m]
    wsq = csq[m:] - csq[:-m]
    means = wsum / m
    variances = np.clip(wsq / m - means * means, 0.0, None)
    return SlidingStats(means=means, stds=np.sqrt(variances), m=m)


def _row_from_dots(
    dots: np.ndarray, stats: SlidingStats, i: int, const: np.ndarray | None
) -> np.ndarray:
    """Turn window-i-vs-all dot products into z-normalized distances.

    ``const`` is the precomputed constant-window mask, or None when the
    series has no constant windows at all (the common case, where the fixed
    limits can be skipped entirely).
    """
    m = stats.m
    mu_q = stats.means[i]
    sd_q = stats.stds[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (dots - m * stats.means * mu_q) / (m * stats.stds * sd_q)
        dist = np.sqrt(np.clip(2.0 * m * (1.0 - rho), 0.0, None))
    if const is not None:
        either_const = const | const[i]
        both_const = const & const[i]
        dist = np.where(either_const, np.sqrt(2.0 * m), dist)
        dist[both_const] = 0.0
    return dist


def _mask_exclusion(dist: np.ndarray, i: int, ell_ex: int) -> None:
    dist[max(0, i - ell_ex) : i + ell_ex + 1, :] = np.inf


def znorm_distance_row(
    ts: TimeSeries,
    stats: SlidingStats,
    i: int,
    self_join: bool = False,
    ell_ex: int = 0,
) -> np.ndarray:
    """Distances from subsequence ``i`` to every subsequence, per channel.

    Returns an (n_sub, d) array. In self-join mode the entries with
    ``|j - i| <= ell_ex`` are set to +inf so the query's own trivial-match
    zone can never be selected downstream.
    """
    if not 0 <= i < stats.n_sub:
        raise ParameterError(f"query index {i} out of range [0, {stats.n_sub})")
    m = stats.m
    dots = np.empty((stats.n_sub, stats.d))
    for c in range(stats.d):
        x = ts.values[:, c]
        dots[:, c] = np.correlate(x, x[i : i + m], mode="valid")
    const = stats.constant
    dist = _row_from_dots(dots, stats, i, const if const.any() else None)
    if self_join:
        _mask_exclusion(dist, i, ell_ex)
    return dist


def chunk_distance_rows(
    ts: TimeSeries,
    stats: SlidingStats,
    first_rows: np.ndarray,
    start: int,
    stop: int,
    self_join: bool = True,
    ell_ex: int = 0,
):
    """Yield ``(i, dist_row)`` for queries in ``[start, stop)``.

    The first row of the range is seeded with a direct correlation; later
    rows reuse the previous row's dot products via the standard streaming
    update. ``first_rows`` is the (n_sub, d) dot-product matrix of window 0
    against all windows, shared across chunks (self-join symmetry gives
    ``dot(i, 0) = first_rows[i]``).
    """
    v = ts.values
    m = stats.m
    n = ts.n
    head = v[: n - m, :]
    tail = v[m:, :]
    const = stats.constant
    if not const.any():
        const = None
    dots = np.empty((stats.n_sub, stats.d))
    for c in range(stats.d):
        x = v[:, c]
        dots[:, c] = np.correlate(x, x[start : start + m], mode="valid")
    for i in range(start, stop):
        if i > start:
            dots[1:] = dots[:-1] - head * v[i - 1, :] + tail * v[i + m - 1, :]
            dots[0] = first_rows[i]
        dist = _row_from_dots(dots, stats, i, const)
        if self_join:
            _mask_exclusion(dist, i, ell_ex)
        yield i, dist


def first_row_dots(ts: TimeSeries, m: int) -> np.ndarray:
    """Dot products of window 0 against every window, per channel."""
    n_sub = ts.n - m + 1
    out = np.empty((n_sub, ts.d))
    for c in range(ts.d):
        x = ts.values[:, c]
        out[:, c] = np.correlate(x, x[:m], mode="valid")
    return out


def znorm_distance_pair(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between two windows by explicit z-normalization.

    Test oracle for the row kernel: normalizes each vector with its own
    population std and returns the Euclidean norm of the difference, with
    the same constant-window rules as the fast path.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ParameterError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ParameterError(f"windows must have length >= 2, got {a.size}")
    m = a.size
    mu_a, sd_a = a.mean(), a.std()
    mu_b, sd_b = b.mean(), b.std()
    const_a = sd_a <= CONSTANT_STD_FACTOR * max(1.0, abs(mu_a))
    const_b = sd_b <= CONSTANT_STD_FACTOR * max(1.0, abs(mu_b))
    if const_a and const_b:
        return 0.0
    if const_a or const_b:
        return float(np.sqrt(2.0 * m))
    za = (a - mu_a) / sd_a
    zb = (b - mu_b) / sd_b
    return float(np.linalg.norm(za - zb))

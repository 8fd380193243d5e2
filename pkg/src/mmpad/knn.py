"""Exclusion-zone-aware k-nearest-neighbor selection and profile construction.

``find_knn_row`` narrows each row to a small candidate set with linear-time
selection, sorts only those candidates, and scans them in (value, index)
order, skipping anything within the exclusion zone of an already accepted
neighbor. If the initial candidate count under-provisions (accepted
neighbors' zones can swallow interleaved candidates), the count is doubled
and the selection redone, so the result always equals the brute-force
repeated-minimum procedure while the common case keeps the pruned cost.

Ties break toward the smaller index everywhere, which makes the fast path
bit-identical to the reference oracle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aggregation import argsorted_cummean_desc, presort_aggregate
from .distance import ROW_CHUNK, chunk_distance_rows, compute_sliding_stats, first_row_dots
from .errors import ParameterError, WindowError
from .io import TimeSeries

MISSING_INDEX = -1


@dataclass
class ProfileTensor:
    """Neighbor distances per (subsequence, profile dimension, neighbor order).

    ``values[i, p, l]`` is the aggregated distance from subsequence i to its
    (l+1)-th accepted neighbor at profile dimension p+1; missing neighbors are
    NaN with index ``MISSING_INDEX``, and once a slot is missing all later
    slots for the same (i, p) are missing too.

    In pre mode ``indices`` are the accepted reference indices of the
    aggregated row. In post mode the aggregated value mixes channels, so
    ``indices[i, p, l]`` records the neighbor contributed by the channel
    ranked p-th in the descending sort for (i, l); at d = 1 both modes
    coincide.
    """

    values: np.ndarray
    indices: np.ndarray
    m: int
    ell_ex: int
    mode: str

    @property
    def n_sub(self) -> int:
        return self.values.shape[0]

    @property
    def d_profile(self) -> int:
        return self.values.shape[1]

    @property
    def k(self) -> int:
        return self.values.shape[2]


def arg_select(values: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` smallest values, ties toward smaller index.

    Expected linear time (introselect partition plus two scans); no ordering
    is guaranteed within the returned set. ``values`` must be NaN-free
    (masked entries are +inf, which is selected only once finite values run
    out).
    """
    values = np.asarray(values)
    n = values.shape[0]
    if values.ndim != 1:
        raise ParameterError("arg_select expects a 1-D array")
    if not 1 <= count <= n:
        raise ParameterError(f"count must be in [1, {n}], got {count}")
    if count == n:
        return np.arange(n)
    part = np.argpartition(values, count - 1)
    pivot = values[part[count - 1]]
    below = np.flatnonzero(values < pivot)
    tied = np.flatnonzero(values == pivot)[: count - below.size]
    return np.concatenate([below, tied])


def initial_candidate_count(k: int, ell_ex: int, n_ref: int) -> int:
    """First candidate-set size: min(2*k*ell_ex, n_ref - 1), at least 1."""
    return max(1, min(2 * k * ell_ex, n_ref - 1))


def find_knn_row(
    row: np.ndarray, k: int, ell_ex: int
) -> tuple[np.ndarray, np.ndarray]:
    """First k valid neighbors of one aggregated row, nearest first.

    ``row`` must already carry +inf in the query's own exclusion zone.
    Returns ``(indices, values)`` of length k; slots beyond the last valid
    neighbor hold ``MISSING_INDEX`` / NaN. Accepted indices are pairwise
    separated by more than ``ell_ex`` and values are nondecreasing.
    """
    row = np.asarray(row, dtype=np.float64)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if ell_ex < 1:
        raise ParameterError(f"ell_ex must be >= 1, got {ell_ex}")
    n_ref = row.shape[0]
    if k == 1:
        # Degenerates to the global minimum; np.argmin's first-occurrence
        # rule is the same smaller-index tie-break as the general path.
        j = int(np.argmin(row))
        if math.isfinite(row[j]):
            return np.array([j], dtype=np.int64), np.array([row[j]])
        return np.array([MISSING_INDEX], dtype=np.int64), np.array([np.nan])
    count = initial_candidate_count(k, ell_ex, n_ref)
    while True:
        cand = arg_select(row, count)
        cand.sort()
        values = row[cand]
        order = np.argsort(values, kind="stable")
        cand = cand[order]
        values = values[order]

        out_idx = np.full(k, MISSING_INDEX, dtype=np.int64)
        out_val = np.full(k, np.nan)
        blocked = np.zeros(n_ref, dtype=bool)
        taken = 0
        exhausted = False
        for j, v in zip(cand.tolist(), values.tolist()):
            if not math.isfinite(v):
                # Candidates are value-sorted, so everything from here on is
                # +inf; a larger candidate set cannot add finite values.
                exhausted = True
                break
            if blocked[j]:
                continue
            out_idx[taken] = j
            out_val[taken] = v
            taken += 1
            if taken == k:
                break
            blocked[max(0, j - ell_ex) : j + ell_ex + 1] = True
        if taken == k or exhausted or count >= n_ref:
            return out_idx, out_val
        count = min(2 * count, n_ref)


def _resolve_chunks(n_sub: int) -> list[tuple[int, int]]:
    return [(a, min(a + ROW_CHUNK, n_sub)) for a in range(0, n_sub, ROW_CHUNK)]


def build_profile(
    ts: TimeSeries,
    m: int,
    k: int,
    mode: str = "pre",
    threads: int = 1,
) -> ProfileTensor:
    """Self-join profile tensor of ``ts`` with window ``m`` and k neighbors.

    Only one distance row is materialized at a time. In ``pre`` mode, each
    row's channel distances are aggregated largest-first before neighbor
    selection at every profile dimension; in ``post`` mode, neighbors are
    found independently per channel first and the aggregation is applied to
    the resulting per-channel profile values.

    Queries are processed in fixed chunks; distinct chunks write disjoint
    output slices, so the tensor is bit-identical for any thread count.
    """
    if m < 2:
        raise WindowError(f"window length must be >= 2, got {m}")
    if ts.n < 2 * m:
        raise WindowError(
            f"series too short: need n >= 2*m, got n={ts.n} with window m={m}"
        )
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    n_sub = ts.n - m + 1
    if k >= n_sub:
        raise ParameterError(f"k={k} must be below the subsequence count {n_sub}")
    if mode not in ("pre", "post"):
        raise ParameterError(f"mode must be 'pre' or 'post', got {mode!r}")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")

    ell_ex = m // 2
    d = ts.d
    stats = compute_sliding_stats(ts, m)
    first_rows = first_row_dots(ts, m)
    values = np.full((n_sub, d, k), np.nan)
    indices = np.full((n_sub, d, k), MISSING_INDEX, dtype=np.int64)

    if mode == "pre":

        def run_chunk(bounds: tuple[int, int]) -> None:
            for i, dist in chunk_distance_rows(
                ts, stats, first_rows, bounds[0], bounds[1], True, ell_ex
            ):
                agg = presort_aggregate(dist)
                for p in range(d):
                    idx, val = find_knn_row(agg[:, p], k, ell_ex)
                    indices[i, p, :] = idx
                    values[i, p, :] = val

    else:
        ch_values = np.full((n_sub, d, k), np.nan)
        ch_indices = np.full((n_sub, d, k), MISSING_INDEX, dtype=np.int64)

        def run_chunk(bounds: tuple[int, int]) -> None:
            for i, dist in chunk_distance_rows(
                ts, stats, first_rows, bounds[0], bounds[1], True, ell_ex
            ):
                for c in range(d):
                    idx, val = find_knn_row(dist[:, c], k, ell_ex)
                    ch_indices[i, c, :] = idx
                    ch_values[i, c, :] = val

    chunks = _resolve_chunks(n_sub)
    if threads == 1 or len(chunks) == 1:
        for bounds in chunks:
            run_chunk(bounds)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_chunk, chunks))

    if mode == "post":
        for l in range(k):
            cum, order = argsorted_cummean_desc(ch_values[:, :, l])
            values[:, :, l] = cum
            indices[:, :, l] = np.take_along_axis(ch_indices[:, :, l], order, axis=1)

    return ProfileTensor(values=values, indices=indices, m=m, ell_ex=ell_ex, mode=mode)

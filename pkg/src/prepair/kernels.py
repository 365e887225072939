"""Dominance kernel behind ``min_basis``.

The kernel takes the counter vectors of one comparable group, sorted by total
count, and marks the ones not dominated by an earlier kept vector. Small
groups use a plain Python loop. Large groups go through a numba-compiled
loop, or through the numpy path when numba is missing or disabled with
``PREPAIR_NO_NUMBA=1``.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

# Below this many vectors the Python loop is faster than dispatching into
# compiled code, and small cases never pay the JIT warm-up.
NUMBA_THRESHOLD = 64

_INT_LIMIT = 2**62

try:
    if os.environ.get("PREPAIR_NO_NUMBA", "") not in ("", "0"):
        raise ImportError("disabled by PREPAIR_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def _minimal_numpy(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    kept = np.empty_like(mat)
    nk = 0
    for i in range(n):
        row = mat[i]
        if nk and (kept[:nk] <= row).all(axis=1).any():
            continue
        keep[i] = True
        kept[nk] = row
        nk += 1
    return keep


if HAVE_NUMBA:

    @njit(cache=True)
    def _minimal_numba(mat):  # pragma: no cover - compiled
        n, d = mat.shape
        keep = np.zeros(n, dtype=np.bool_)
        kept = np.empty(n, dtype=np.int64)
        nk = 0
        for i in range(n):
            dominated = False
            for t in range(nk):
                j = kept[t]
                le = True
                for k in range(d):
                    if mat[j, k] > mat[i, k]:
                        le = False
                        break
                if le:
                    dominated = True
                    break
            if not dominated:
                keep[i] = True
                kept[nk] = i
                nk += 1
        return keep

else:
    _minimal_numba = None


def as_matrix(rows: Sequence[Sequence[int]]) -> np.ndarray:
    """Stack counter vectors into an int64 matrix, refusing values that could overflow."""
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    if max((max(r) for r in rows if len(r)), default=0) >= _INT_LIMIT:
        raise OverflowError("counter value exceeds the int64 kernel range")
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), len(rows[0]))


def minimal_mask(rows: Sequence[Sequence[int]], backend: str | None = None) -> list[bool]:
    """Keep-mask for vectors sorted by nondecreasing sum.

    A vector is dropped iff some earlier kept vector is componentwise below it.
    Exact duplicates are assumed to have been removed by the caller.
    ``backend`` forces ``"numpy"`` or ``"numba"``; by default the size
    threshold decides.
    """
    n = len(rows)
    if n <= 1:
        return [True] * n
    if backend is None:
        if n < NUMBA_THRESHOLD:
            backend = "python"
        else:
            backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "python":
        keep: list[bool] = []
        kept: list[Sequence[int]] = []
        for r in rows:
            dom = any(all(x <= y for x, y in zip(k, r)) for k in kept)
            keep.append(not dom)
            if not dom:
                kept.append(r)
        return keep
    mat = as_matrix(rows)
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return _minimal_numba(mat).tolist()
    if backend == "numpy":
        return _minimal_numpy(mat).tolist()
    raise ValueError(f"unknown backend {backend!r}")

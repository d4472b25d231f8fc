"""Analytic first-layer weights from squared nearest-pixel distances.

A pairwise weight is ``w(p) = d_i(p)^2 - d_j(p)^2`` where ``d_k(p)`` is the
distance from cell ``p`` to the nearest active cell of sample ``k``. The
weighted sum over the input's active cells is then negative exactly when
the input sits closer to sample ``i``. Everything here is integer
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DimensionError
from .grid import ImageGrid, check_dims

_CHUNK = 512


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Squared distance from every cell to the nearest active cell of one sample."""

    d2: np.ndarray  # (rows, cols) int64

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d2.shape[1], self.d2.shape[0])

    def __getitem__(self, cr):
        c, r = cr
        return int(self.d2[r, c])


@dataclass(frozen=True, eq=False)
class WeightGrid:
    w: np.ndarray  # (rows, cols) int64

    @property
    def dims(self) -> tuple[int, int]:
        return (self.w.shape[1], self.w.shape[0])

    def __neg__(self) -> "WeightGrid":
        return WeightGrid(_ro(-self.w))

    def __eq__(self, other):
        if not isinstance(other, WeightGrid):
            return NotImplemented
        return self.w.shape == other.w.shape and bool(np.array_equal(self.w, other.w))

    __hash__ = None


def _ro(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def distance_field(sample: ImageGrid) -> DistanceField:
    """Exact squared-Euclidean distance field of ``sample``.

    Exhaustive scan over the active cells, chunked to bound memory.
    """
    rows, cols = sample.cells.shape
    ar, ac = np.nonzero(sample.cells)
    if ar.size == 0:
        raise DegenerateSampleError("sample has no active cells; distance is undefined")
    rr, cc = np.mgrid[0:rows, 0:cols]
    rr = rr.reshape(-1, 1).astype(np.int64)
    cc = cc.reshape(-1, 1).astype(np.int64)
    best = np.full(rows * cols, np.iinfo(np.int64).max, dtype=np.int64)
    for s in range(0, ar.size, _CHUNK):
        dr = rr - ar[s : s + _CHUNK].astype(np.int64)
        dc = cc - ac[s : s + _CHUNK].astype(np.int64)
        np.minimum(best, (dr * dr + dc * dc).min(axis=1), out=best)
    return DistanceField(_ro(best.reshape(rows, cols)))


def build_pair_weights(field_i: DistanceField, field_j: DistanceField) -> WeightGrid:
    if field_i.dims != field_j.dims:
        raise DimensionError(f"distance fields differ in dims: {field_i.dims} vs {field_j.dims}")
    return WeightGrid(_ro(field_i.d2 - field_j.d2))


def weighted_sum(weights: WeightGrid, input: ImageGrid) -> int:
    check_dims(weights.dims, input)
    return int(weights.w[input.cells.astype(bool)].sum())


def threshold_fire(sn) -> int:
    """1 on a strictly negative sum; a zero sum does not fire."""
    return 1 if sn < 0 else 0


def sample_score(field_k: DistanceField, input: ImageGrid) -> int:
    """Sum of the sample's squared distances over the input's active cells."""
    check_dims(field_k.dims, input)
    return int(field_k.d2[input.cells.astype(bool)].sum())


def pair_weights_from_samples(sample_i: ImageGrid, sample_j: ImageGrid) -> WeightGrid:
    return build_pair_weights(distance_field(sample_i), distance_field(sample_j))

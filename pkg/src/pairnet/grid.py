"""Binary image grids and labeled datasets.

Cells are addressed as ``(c, r)`` = (column, row). Storage is a row-major
``(rows, cols)`` uint8 array, so ``grid[c, r]`` reads ``cells[r, c]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """An immutable C x R grid of 0/1 cells."""

    cells: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.cells)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"grid must be 2-D with at least one row and column, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("grid cells must be 0 or 1")
        object.__setattr__(self, "cells", _frozen(a.astype(np.uint8, copy=True)))

    @classmethod
    def zeros(cls, cols: int, rows: int) -> "ImageGrid":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def from_cells(cls, cols: int, rows: int, coords: Iterable[tuple[int, int]]) -> "ImageGrid":
        """Grid with 1s exactly at the given ``(c, r)`` coordinates."""
        a = np.zeros((rows, cols), dtype=np.uint8)
        for c, r in coords:
            if not (0 <= c < cols and 0 <= r < rows):
                raise DimensionError(f"cell ({c}, {r}) outside {cols}x{rows} grid")
            a[r, c] = 1
        return cls(a)

    @classmethod
    def from_text(cls, text: str) -> "ImageGrid":
        """Parse ``'#'``/``'.'`` rows, e.g. ``"#.#\\n.#."``."""
        rows = [line.strip() for line in text.strip().splitlines()]
        return cls(np.array([[ch == "#" for ch in row] for row in rows], dtype=np.uint8))

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.cols, self.rows)

    @property
    def flat(self) -> np.ndarray:
        return self.cells.reshape(-1)

    def __getitem__(self, cr: tuple[int, int]) -> int:
        c, r = cr
        return int(self.cells[r, c])

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.cells.shape, self.cells.tobytes()))

    def to_text(self) -> str:
        return "\n".join("".join("#" if v else "." for v in row) for row in self.cells)

    def __repr__(self):
        return f"ImageGrid({self.cols}x{self.rows}, active={int(self.cells.sum())})"


@dataclass(frozen=True)
class LabeledImage:
    grid: ImageGrid
    label: int


@dataclass(frozen=True)
class Dataset:
    """Ordered labeled images with a declared class count.

    Construction does not enforce consistency; use :func:`validate_dataset`.
    """

    class_count: int
    items: tuple[LabeledImage, ...]
    dims: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.dims is None and self.items:
            object.__setattr__(self, "dims", self.items[0].grid.dims)

    @classmethod
    def from_grids(cls, grids: Sequence[ImageGrid], labels: Sequence[int], class_count: int | None = None) -> "Dataset":
        if len(grids) != len(labels):
            raise ValueError(f"{len(grids)} grids but {len(labels)} labels")
        labels = [int(l) for l in labels]
        k = class_count if class_count is not None else (max(labels) + 1 if labels else 0)
        return cls(k, tuple(LabeledImage(g, l) for g, l in zip(grids, labels)))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def grids(self) -> list[ImageGrid]:
        return [it.grid for it in self.items]

    @property
    def labels(self) -> np.ndarray:
        return np.array([it.label for it in self.items], dtype=np.int64)

    def of_class(self, label: int) -> list[ImageGrid]:
        return [it.grid for it in self.items if it.label == label]

    def stack(self) -> np.ndarray:
        """All grids as a ``(M, rows, cols)`` uint8 array."""
        if not self.items:
            raise DimensionError("empty dataset has no shape")
        return np.stack([it.grid.cells for it in self.items])


@dataclass(frozen=True)
class GrayDataset:
    """Grayscale images in [0, 1] with labels, before binarization."""

    images: np.ndarray  # (M, rows, cols) float64
    labels: np.ndarray  # (M,) int64

    def __len__(self) -> int:
        return len(self.labels)

    def binarize(self, threshold: float = 0.5, class_count: int | None = None) -> Dataset:
        grids = [binarize_grid(img, threshold) for img in self.images]
        return Dataset.from_grids(grids, self.labels.tolist(), class_count)


def binarize_grid(gray, threshold: float = 0.5) -> ImageGrid:
    """Cell is 1 iff the gray value is strictly greater than ``threshold``."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigurationError(f"threshold must lie in [0, 1], got {threshold}")
    a = np.asarray(gray, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"gray grid must be a nonempty 2-D array, got shape {a.shape}")
    return ImageGrid((a > threshold).astype(np.uint8))


def active_cells(grid: ImageGrid) -> list[tuple[int, int]]:
    """``(c, r)`` of every 1-cell, row-major."""
    rs, cs = np.nonzero(grid.cells)
    return [(int(c), int(r)) for r, c in zip(rs, cs)]


def check_dims(expected: tuple[int, int], grid: ImageGrid, what: str = "input") -> None:
    if grid.dims != tuple(expected):
        raise DimensionError(f"{what} is {grid.dims[0]}x{grid.dims[1]}, expected {expected[0]}x{expected[1]}")


@dataclass(frozen=True)
class Issue:
    kind: str  # dimension-mismatch | missing-label | label-out-of-range | degenerate-image
    index: int | None
    message: str
    fatal: bool = True


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not any(i.fatal for i in self.issues)

    def of_kind(self, kind: str) -> list[Issue]:
        return [i for i in self.issues if i.kind == kind]


def validate_dataset(ds: Dataset) -> ValidationReport:
    issues = []
    dims = ds.dims
    seen = set()
    for idx, item in enumerate(ds.items):
        if dims is not None and item.grid.dims != tuple(dims):
            issues.append(Issue("dimension-mismatch", idx, f"item {idx} is {item.grid.dims}, dataset is {tuple(dims)}"))
        if not 0 <= item.label < ds.class_count:
            issues.append(Issue("label-out-of-range", idx, f"item {idx} has label {item.label}, K={ds.class_count}"))
        seen.add(item.label)
        if not item.grid.cells.any():
            issues.append(Issue("degenerate-image", idx, f"item {idx} has no active cells", fatal=False))
    for k in range(ds.class_count):
        if k not in seen:
            issues.append(Issue("missing-label", None, f"class {k} has no examples"))
    return ValidationReport(tuple(issues))

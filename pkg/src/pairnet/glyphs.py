"""5x7 capital-letter glyphs and noisy copies of them."""

from __future__ import annotations

import string

import numpy as np

from .errors import ConfigurationError
from .grid import Dataset, ImageGrid

GLYPH_COLS, GLYPH_ROWS = 5, 7

_FONT = {
    "A": ".###. #...# #...# ##### #...# #...# #...#",
    "B": "####. #...# #...# ####. #...# #...# ####.",
    "C": ".#### #...# #.... #.... #.... #...# .####",
    "D": "###.. #..#. #...# #...# #...# #..#. ###..",
    "E": "##### #.... #.... ###.. #.... #.... #####",
    "F": "##### #.... #.... ####. #.... #.... #....",
    "G": ".###. #...# #.... #.### #...# #...# .###.",
    "H": "#...# #...# #...# ##### #...# #...# #...#",
    "I": ".###. ..#.. ..#.. ..#.. ..#.. ..#.. .###.",
    "J": "..### ...#. ...#. ...#. ...#. #..#. .##..",
    "K": "#...# #..#. #.#.. ##... #.#.. #..#. #...#",
    "L": ".#... .#... .#... .#... .#... .#... .####",
    "M": "#...# ##.## #.#.# #.#.# #...# #...# #...#",
    "N": "#...# #...# ##..# #.#.# #..## #...# #...#",
    "O": ".###. #...# #...# #...# #...# #...# .###.",
    "P": "####. #...# #...# #...# ####. #.... #....",
    "Q": ".###. #...# #...# #...# #.#.# #..#. .##.#",
    "R": "####. #...# #...# ####. #.#.. #..#. #...#",
    "S": ".#### #.... #.... .###. ....# ....# ####.",
    "T": "##### ..#.. ..#.. ..#.. ..#.. ..#.. ..#..",
    "U": "#...# #...# #...# #...# #...# #...# .###.",
    "V": "#...# #...# #...# #...# #...# .#.#. ..#..",
    "W": "#...# #...# #...# #.#.# #.#.# #.#.# .#.#.",
    "X": "#...# #...# .#.#. ..#.. .#.#. #...# #...#",
    "Y": "#...# #...# .#.#. ..#.. ..#.. ..#.. ..#..",
    "Z": "##### ....# ...#. ..#.. .#... #.... #####",
}


def letter(ch: str) -> ImageGrid:
    return ImageGrid.from_text("\n".join(_FONT[ch.upper()].split()))


def alphabet(classes: int) -> list[ImageGrid]:
    """Clean glyphs for the first ``classes`` letters (A, B, C, ...)."""
    if not 2 <= classes <= 26:
        raise ConfigurationError(f"classes must be between 2 and 26, got {classes}")
    return [letter(ch) for ch in string.ascii_uppercase[:classes]]


def flip_cells(grid: ImageGrid, count: int, rng: np.random.Generator) -> ImageGrid:
    """Copy of ``grid`` with exactly ``count`` distinct cells inverted."""
    flat = grid.flat.copy()
    idx = rng.choice(flat.size, size=count, replace=False)
    flat[idx] ^= 1
    return ImageGrid(flat.reshape(grid.cells.shape))


def generate_glyphs(classes: int, samples_per_class: int, noise: int, seed: int = 0) -> Dataset:
    """Noisy letter dataset, class-major order, deterministic under ``seed``."""
    if noise < 0 or noise >= GLYPH_COLS * GLYPH_ROWS:
        raise ConfigurationError(f"noise must be in [0, {GLYPH_COLS * GLYPH_ROWS - 1}], got {noise}")
    if samples_per_class < 1:
        raise ConfigurationError("samples_per_class must be >= 1")
    clean = alphabet(classes)
    rng = np.random.default_rng(seed)
    grids, labels = [], []
    for k, g in enumerate(clean):
        for _ in range(samples_per_class):
            grids.append(flip_cells(g, noise, rng) if noise else g)
            labels.append(k)
    return Dataset.from_grids(grids, labels, classes)

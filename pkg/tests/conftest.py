import numpy as np
import pytest
from hypothesis import settings

from pairnet.grid import ImageGrid

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_grid(rng, cols, rows, density=0.3, nonempty=False):
    while True:
        a = (rng.random((rows, cols)) < density).astype(np.uint8)
        if not nonempty or a.any():
            return ImageGrid(a)


def brute_d2(sample: ImageGrid) -> np.ndarray:
    """Squared distance to the nearest active cell by plain double loop."""
    rows, cols = sample.cells.shape
    act = [(c, r) for r in range(rows) for c in range(cols) if sample.cells[r, c]]
    out = np.zeros((rows, cols), dtype=np.int64)
    for r in range(rows):
        for c in range(cols):
            out[r, c] = min((c - ac) ** 2 + (r - ar) ** 2 for ac, ar in act)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# 2x1 XOR set: class i = exactly one active cell, class j = none or both.
XOR_POS = [ImageGrid.from_text("#."), ImageGrid.from_text(".#")]
XOR_NEG = [ImageGrid.from_text(".."), ImageGrid.from_text("##")]
XOR_GD = dict(learning_rate=2.0, max_epochs=5000, init_scale=1.0)
# First seed in 0..9 for which gradient descent separates XOR with these settings
# (found by running the trainer over seeds 0..9).
XOR_SEED_HIDDEN2 = 1
XOR_SEED_HIDDEN8 = 0


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: s[7:9]):
        terminalreporter.write_line(line)

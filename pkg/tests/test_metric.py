import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairnet.errors import DegenerateSampleError, DimensionError
from pairnet.grid import ImageGrid
from pairnet.metric import (
    build_pair_weights,
    distance_field,
    sample_score,
    threshold_fire,
    weighted_sum,
)

from conftest import brute_d2, random_grid


def row(*cells, cols):
    return ImageGrid.from_cells(cols, 1, [(c, 0) for c in cells])


class TestDistanceField:
    def test_single_pixel_row(self):
        assert distance_field(row(0, cols=3)).d2.tolist() == [[0, 1, 4]]

    def test_all_ones(self):
        assert not distance_field(ImageGrid(np.ones((3, 4), np.uint8))).d2.any()

    def test_two_pixels(self):
        s = row(0, 3, cols=4)
        expected = brute_d2(s)
        assert expected.tolist() == [[0, 1, 1, 0]]
        np.testing.assert_array_equal(distance_field(s).d2, expected)

    def test_blank_sample(self):
        with pytest.raises(DegenerateSampleError):
            distance_field(ImageGrid.zeros(3, 3))

    def test_exhaustive_small_pixel_pairs(self):
        """Every single- and two-pixel sample on every grid up to 8x8."""
        for cols, rows in itertools.product(range(1, 9), repeat=2):
            cells = [(c, r) for r in range(rows) for c in range(cols)]
            for k in (1, 2):
                for pick in itertools.combinations(cells, k):
                    s = ImageGrid.from_cells(cols, rows, pick)
                    np.testing.assert_array_equal(distance_field(s).d2, brute_d2(s))

    @given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_invariants(self, cols, rows, seed):
        s = random_grid(np.random.default_rng(seed), cols, rows, 0.2, nonempty=True)
        d2 = distance_field(s).d2
        np.testing.assert_array_equal(d2 == 0, s.cells == 1)
        assert d2.max() <= (cols - 1) ** 2 + (rows - 1) ** 2
        root = np.sqrt(d2)
        assert np.all((root[:, 1:] - root[:, :-1]) ** 2 <= 1 + 1e-9)
        assert np.all((root[1:, :] - root[:-1, :]) ** 2 <= 1 + 1e-9)
        assert d2.dtype == np.int64

    def test_large_grid_matches_brute_force(self, rng):
        s = random_grid(rng, 40, 40, 0.05, nonempty=True)
        np.testing.assert_array_equal(distance_field(s).d2, brute_d2(s))


class TestPairWeights:
    def test_equal_fields(self):
        f = distance_field(row(1, cols=3))
        assert not build_pair_weights(f, f).w.any()

    def test_example(self):
        fi, fj = distance_field(row(0, cols=3)), distance_field(row(2, cols=3))
        expected = brute_d2(row(0, cols=3)) - brute_d2(row(2, cols=3))
        assert expected.tolist() == [[-4, 0, 4]]
        np.testing.assert_array_equal(build_pair_weights(fi, fj).w, expected)

    def test_swap_negates(self):
        fi, fj = distance_field(row(0, cols=3)), distance_field(row(2, cols=3))
        assert build_pair_weights(fj, fi) == -build_pair_weights(fi, fj)

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            build_pair_weights(distance_field(row(0, cols=3)), distance_field(row(0, cols=4)))


class TestWeightedSum:
    def setup_method(self):
        self.si = ImageGrid.from_cells(5, 5, [(0, 0), (1, 0)])
        self.sj = ImageGrid.from_cells(5, 5, [(4, 4), (3, 4)])
        self.w = build_pair_weights(distance_field(self.si), distance_field(self.sj))

    def test_blank_input(self):
        assert weighted_sum(self.w, ImageGrid.zeros(5, 5)) == 0

    def test_own_sample_is_negative(self):
        assert weighted_sum(self.w, self.si) < 0

    def test_single_cell(self):
        x = ImageGrid.from_cells(5, 5, [(2, 3)])
        assert weighted_sum(self.w, x) == int(self.w.w[3, 2])

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            weighted_sum(self.w, ImageGrid.zeros(4, 5))

    def test_returns_python_int(self):
        assert type(weighted_sum(self.w, self.si)) is int


class TestThresholdFire:
    @pytest.mark.parametrize("sn,bit", [(-5, 1), (5, 0), (0, 0), (-1, 1), (1, 0)])
    def test_values(self, sn, bit):
        assert threshold_fire(sn) == bit


class TestSampleScore:
    def test_own_sample(self):
        s = ImageGrid.from_cells(4, 4, [(1, 1), (2, 3)])
        assert sample_score(distance_field(s), s) == 0

    def test_blank(self):
        s = ImageGrid.from_cells(4, 4, [(1, 1)])
        assert sample_score(distance_field(s), ImageGrid.zeros(4, 4)) == 0

    def test_single_cell(self):
        assert sample_score(distance_field(row(0, cols=2)), row(1, cols=2)) == 1

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            sample_score(distance_field(row(0, cols=2)), row(1, cols=3))


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_antisymmetry_decomposition_sign(cols, rows, seed):
    rng = np.random.default_rng(seed)
    a = random_grid(rng, cols, rows, 0.3, nonempty=True)
    b = random_grid(rng, cols, rows, 0.3, nonempty=True)
    x = random_grid(rng, cols, rows, 0.4)
    fa, fb = distance_field(a), distance_field(b)
    wab, wba = build_pair_weights(fa, fb), build_pair_weights(fb, fa)
    np.testing.assert_array_equal(wab.w, -wba.w)
    sn = weighted_sum(wab, x)
    assert sn == sample_score(fa, x) - sample_score(fb, x)
    assert threshold_fire(sn) == int(sample_score(fa, x) < sample_score(fb, x))

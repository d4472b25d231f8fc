import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pairnet.errors import ConfigurationError, DimensionError
from pairnet.grid import Dataset, ImageGrid, LabeledImage, active_cells, binarize_grid, validate_dataset


class TestImageGrid:
    def test_coordinates_are_column_row(self):
        g = ImageGrid.from_cells(4, 6, [(2, 3)])
        assert g.dims == (4, 6)
        assert g[2, 3] == 1
        assert g.cells[3, 2] == 1
        assert int(g.cells.sum()) == 1

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            ImageGrid(np.array([[0, 2]]))

    def test_rejects_empty(self):
        with pytest.raises(DimensionError):
            ImageGrid(np.zeros((0, 3)))

    def test_is_immutable(self):
        g = ImageGrid.zeros(2, 2)
        with pytest.raises(ValueError):
            g.cells[0, 0] = 1

    def test_text_round_trip(self):
        g = ImageGrid.from_text("#.#\n.#.")
        assert g.dims == (3, 2)
        assert ImageGrid.from_text(g.to_text()) == g


class TestBinarize:
    def test_all_zero(self):
        g = binarize_grid(np.zeros((3, 4)), 0.5)
        assert not g.cells.any()
        assert g.dims == (4, 3)

    def test_equal_to_threshold_is_zero(self):
        g = binarize_grid([[0.5, 0.51]], 0.5)
        assert g.cells.tolist() == [[0, 1]]

    def test_example(self):
        g = binarize_grid([[0.9, 0.1], [0.6, 0.4]], 0.5)
        assert g.cells.tolist() == [[1, 0], [1, 0]]

    def test_threshold_one_gives_blank(self):
        assert not binarize_grid(np.ones((2, 2)), 1.0).cells.any()

    def test_empty_grid(self):
        with pytest.raises(DimensionError):
            binarize_grid(np.zeros((0, 0)), 0.5)

    def test_threshold_range(self):
        with pytest.raises(ConfigurationError):
            binarize_grid(np.zeros((2, 2)), 1.5)

    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 1)), st.floats(0, 1))
    def test_output_is_binary(self, gray, thr):
        g = binarize_grid(gray, thr)
        assert set(np.unique(g.cells)) <= {0, 1}
        assert g.cells.shape == gray.shape


class TestActiveCells:
    def test_blank(self):
        assert active_cells(ImageGrid.zeros(3, 3)) == []

    def test_single(self):
        assert active_cells(ImageGrid.from_cells(4, 5, [(2, 3)])) == [(2, 3)]

    def test_row_major(self):
        assert active_cells(ImageGrid(np.ones((2, 2), np.uint8))) == [(0, 0), (1, 0), (0, 1), (1, 1)]

    @given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.integers(0, 1)))
    def test_count_and_round_trip(self, a):
        g = ImageGrid(a)
        cells = active_cells(g)
        assert len(cells) == int(a.sum())
        assert ImageGrid.from_cells(g.cols, g.rows, cells) == g


def _ds(items, k=3):
    return Dataset(k, tuple(LabeledImage(g, l) for g, l in items))


class TestValidateDataset:
    def test_consistent(self):
        g = ImageGrid.from_cells(3, 3, [(1, 1)])
        rep = validate_dataset(_ds([(g, 0), (g, 1), (g, 2)]))
        assert rep.issues == ()
        assert rep.ok

    def test_dimension_mismatch(self):
        g = ImageGrid.from_cells(3, 3, [(1, 1)])
        h = ImageGrid.from_cells(2, 3, [(1, 1)])
        rep = validate_dataset(_ds([(g, 0), (g, 1), (h, 2)]))
        assert [i.kind for i in rep.issues] == ["dimension-mismatch"]
        assert rep.issues[0].index == 2

    def test_missing_label(self):
        g = ImageGrid.from_cells(3, 3, [(1, 1)])
        rep = validate_dataset(_ds([(g, 0), (g, 1)]))
        assert [i.kind for i in rep.issues] == ["missing-label"]
        assert "class 2" in rep.issues[0].message

    def test_blank_image_flagged_not_fatal(self):
        g = ImageGrid.from_cells(3, 3, [(1, 1)])
        rep = validate_dataset(_ds([(g, 0), (g, 1), (ImageGrid.zeros(3, 3), 2)]))
        assert [i.kind for i in rep.issues] == ["degenerate-image"]
        assert rep.ok

    def test_pure(self):
        g = ImageGrid.from_cells(3, 3, [(1, 1)])
        ds = _ds([(g, 0), (ImageGrid.zeros(2, 2), 5)])
        before = (ds.class_count, ds.items, ds.dims)
        validate_dataset(ds)
        assert (ds.class_count, ds.items, ds.dims) == before

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairnet.blocks import TrainConfig
from pairnet.builders import build_metric_ensemble, train_ensemble
from pairnet.ensemble import predict_batch
from pairnet.errors import ModelFormatError, ParseError, PairNetError
from pairnet.glyphs import alphabet, generate_glyphs
from pairnet.grid import ImageGrid
from pairnet.persist import (
    block_bytes,
    dumps_model,
    format_glyphs,
    idx_images_bytes,
    idx_labels_bytes,
    load_glyphs,
    load_idx,
    load_model,
    loads_model,
    parse_glyph_bytes,
    parse_glyphs,
    parse_idx,
    save_idx,
    save_model,
)


class TestIdx:
    def test_scaling(self, tmp_path):
        save_idx(tmp_path / "i", tmp_path / "l", np.array([[[0, 255], [128, 64]]]), [3])
        ds = load_idx(tmp_path / "i", tmp_path / "l")
        np.testing.assert_allclose(ds.images[0], [[0, 1], [128 / 255, 64 / 255]])
        assert ds.images[0, 1, 0] == pytest.approx(0.502, abs=1e-3)
        assert ds.images[0, 1, 1] == pytest.approx(0.251, abs=1e-3)
        assert ds.labels.tolist() == [3]

    def test_header_bytes(self):
        raw = idx_images_bytes(np.zeros((1, 2, 3), np.uint8))
        assert raw[:4] == b"\x00\x00\x08\x03"
        assert raw[4:16] == b"\x00\x00\x00\x01\x00\x00\x00\x02\x00\x00\x00\x03"

    def test_labels_with_image_magic(self):
        images = idx_images_bytes(np.zeros((1, 2, 2), np.uint8))
        with pytest.raises(ParseError, match="wrong magic") as exc:
            parse_idx(images, images)
        assert exc.value.offset == 0

    def test_count_mismatch(self):
        with pytest.raises(ParseError, match="count mismatch"):
            parse_idx(idx_images_bytes(np.zeros((10, 2, 2), np.uint8)), idx_labels_bytes(np.zeros(9)))

    def test_truncated(self):
        raw = idx_images_bytes(np.zeros((2, 2, 2), np.uint8))
        with pytest.raises(ParseError, match="truncated payload"):
            parse_idx(raw[:-1], idx_labels_bytes([0, 1]))
        with pytest.raises(ParseError, match="truncated IDX header"):
            parse_idx(raw[:9], idx_labels_bytes([0, 1]))

    def test_binarize(self):
        ds = parse_idx(idx_images_bytes(np.array([[[0, 200], [128, 127]]])), idx_labels_bytes([0]))
        assert ds.binarize(0.5).items[0].grid.cells.tolist() == [[0, 1], [1, 0]]


class TestGlyphs:
    def test_record(self):
        ds = parse_glyphs("label 0\n#.#\n.#.\n")
        assert len(ds) == 1 and ds.items[0].label == 0
        assert ds.items[0].grid.dims == (3, 2)
        assert ds.items[0].grid.cells.tolist() == [[1, 0, 1], [0, 1, 0]]

    def test_ragged(self):
        with pytest.raises(ParseError, match="ragged") as exc:
            parse_glyphs("label 0\n#.#\n.#\n")
        assert exc.value.line == 3

    def test_foreign(self):
        with pytest.raises(ParseError, match="foreign"):
            parse_glyphs("label 0\n#x#\n")

    def test_missing_label(self):
        with pytest.raises(ParseError, match="label") as exc:
            parse_glyphs("#.#\n")
        assert exc.value.line == 1

    def test_empty(self):
        with pytest.raises(ParseError, match="empty"):
            parse_glyphs("")

    def test_dims_disagree(self):
        with pytest.raises(ParseError):
            parse_glyphs("label 0\n##\n\nlabel 1\n###\n")

    def test_round_trip(self, tmp_path):
        ds = generate_glyphs(4, 3, 2, seed=3)
        (tmp_path / "g.txt").write_text(format_glyphs(ds))
        back = load_glyphs(tmp_path / "g.txt")
        assert back.grids == ds.grids and back.labels.tolist() == ds.labels.tolist()

    def test_not_utf8(self):
        with pytest.raises(ParseError, match="UTF-8"):
            parse_glyph_bytes(b"label 0\n\xff\xfe\n")


def _trained(kind, rng, dims=(3, 3)):
    cols, rows = dims
    from pairnet.grid import Dataset

    grids = [ImageGrid((rng.random((rows, cols)) < 0.5).astype(np.uint8)) for _ in range(24)]
    ds = Dataset.from_grids(grids, [i % 3 for i in range(24)])
    cfg = TrainConfig(max_epochs=5) if kind == "perceptron" else TrainConfig.gradient_descent(max_epochs=5)
    return train_ensemble(ds, kind, cfg, hidden_size=3)[0]


class TestModel:
    def test_round_trip_metric(self, tmp_path, rng):
        e = build_metric_ensemble(alphabet(3), variant="full")
        save_model(e, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert back.variant == e.variant and back.unit_threshold == 2 and back.class_groups == e.class_groups
        for k in e.blocks:
            assert block_bytes(back.blocks[k]) == block_bytes(e.blocks[k])
            np.testing.assert_array_equal(back.blocks[k].weights.w, e.blocks[k].weights.w)
        xs = (rng.random((1000, 7, 5)) < 0.4).astype(np.uint8)
        np.testing.assert_array_equal(predict_batch(back, xs).labels, predict_batch(e, xs).labels)
        assert dumps_model(back) == dumps_model(e)

    @pytest.mark.parametrize("kind", ["perceptron", "sigmoid"])
    def test_round_trip_trained_bit_exact(self, kind, rng):
        e = _trained(kind, rng)
        back = loads_model(dumps_model(e))
        for k, b in e.blocks.items():
            assert block_bytes(back.blocks[k]) == block_bytes(b)
        xs = (rng.random((500, 3, 3)) < 0.5).astype(np.uint8)
        np.testing.assert_array_equal(predict_batch(back, xs).votes, predict_batch(e, xs).votes)

    def test_field_order(self):
        doc = json.loads(dumps_model(build_metric_ensemble(alphabet(3))))
        assert list(doc) == [
            "format_version", "dims", "topology", "unit_count", "unit_threshold",
            "class_groups", "binarize_threshold", "blocks",
        ]
        assert doc["dims"] == [5, 7] and doc["unit_threshold"] == 2

    def _doc(self):
        return json.loads(dumps_model(build_metric_ensemble(alphabet(3))))

    def test_bad_threshold(self):
        doc = self._doc()
        doc["unit_threshold"] = 3
        with pytest.raises(ModelFormatError, match="unit_threshold"):
            loads_model(json.dumps(doc))

    def test_block_count(self):
        doc = self._doc()
        doc["blocks"].append(dict(doc["blocks"][0], pair=[2, 1]))
        with pytest.raises(ModelFormatError, match="block count 4 != 3"):
            loads_model(json.dumps(doc))

    def test_unknown_version(self):
        doc = self._doc()
        doc["format_version"] = 2
        with pytest.raises(ModelFormatError, match="format_version"):
            loads_model(json.dumps(doc))

    def test_wrong_pairs(self):
        doc = self._doc()
        doc["blocks"][2]["pair"] = [2, 1]
        with pytest.raises(ModelFormatError, match="invariant"):
            loads_model(json.dumps(doc))

    def test_bad_groups(self):
        doc = self._doc()
        doc["class_groups"] = {"0": [0, 1], "1": [1, 2]}
        with pytest.raises(ModelFormatError):
            loads_model(json.dumps(doc))

    def test_malformed(self):
        with pytest.raises(ModelFormatError):
            loads_model("{not json")
        with pytest.raises(ModelFormatError):
            loads_model("[]")

    @given(st.binary(max_size=300))
    def test_arbitrary_bytes_never_crash(self, data):
        for loader in (loads_model, parse_glyph_bytes, lambda d: parse_idx(d, d)):
            try:
                loader(data)
            except PairNetError:
                pass

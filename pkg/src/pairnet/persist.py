"""Dataset readers (IDX, glyph text) and the JSON model file.

Glyph text format::

    label 0
    .###.
    #...#
    ...

    label 1
    ...

Records are separated by blank lines. ``#`` is an active cell, ``.`` an
inactive one. All records must share dimensions.

Model JSON (``format_version`` 1), keys in this order: ``format_version``,
``dims`` ``[C, R]``, ``topology``, ``unit_count``, ``unit_threshold``,
``class_groups`` (class id string -> sorted unit list),
``binarize_threshold``, ``blocks``. Each block has ``pair`` and ``kind``.
Metric blocks store integer ``weights`` as R rows of C values. Trainable
blocks store every real as a hexadecimal float string (``float.hex``);
a ``decimal`` sibling repeats them in decimal for reading only.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .blocks import MetricBlock, PairBlock, PerceptronBlock, SigmoidBlock
from .ensemble import Ensemble, Topology, assemble, expected_block_count
from .errors import ModelFormatError, ParseError, PairNetError
from .grid import Dataset, GrayDataset, ImageGrid
from .metric import WeightGrid

FORMAT_VERSION = 1
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


# -- IDX ------------------------------------------------------------------------


def _idx_header(data: bytes, expect_magic: int, what: str) -> tuple[tuple[int, ...], int]:
    if len(data) < 4:
        raise ParseError(f"{what}: file too short for IDX magic", offset=len(data))
    (magic,) = struct.unpack(">I", data[:4])
    if magic != expect_magic:
        raise ParseError(f"{what}: wrong magic 0x{magic:08x}, expected 0x{expect_magic:08x}", offset=0)
    ndim = data[3]
    end = 4 + 4 * ndim
    if len(data) < end:
        raise ParseError(f"{what}: truncated IDX header", offset=len(data))
    dims = struct.unpack(f">{ndim}I", data[4:end])
    return dims, end


def parse_idx_images(data: bytes) -> np.ndarray:
    """``(count, rows, cols)`` uint8 array from an IDX image file's bytes."""
    (count, rows, cols), off = _idx_header(data, IDX_IMAGES_MAGIC, "images")
    size = count * rows * cols
    if len(data) - off < size:
        raise ParseError(f"images: truncated payload, need {size} bytes, have {len(data) - off}", offset=len(data))
    if len(data) - off > size:
        raise ParseError("images: trailing bytes after payload", offset=off + size)
    return np.frombuffer(data, dtype=np.uint8, count=size, offset=off).reshape(count, rows, cols)


def parse_idx_labels(data: bytes) -> np.ndarray:
    (count,), off = _idx_header(data, IDX_LABELS_MAGIC, "labels")
    if len(data) - off < count:
        raise ParseError(f"labels: truncated payload, need {count} bytes, have {len(data) - off}", offset=len(data))
    if len(data) - off > count:
        raise ParseError("labels: trailing bytes after payload", offset=off + count)
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=off).astype(np.int64)


def parse_idx(images: bytes, labels: bytes) -> GrayDataset:
    imgs = parse_idx_images(images)
    labs = parse_idx_labels(labels)
    if len(imgs) != len(labs):
        raise ParseError(f"count mismatch: {len(imgs)} images, {len(labs)} labels", offset=4)
    if len(imgs) and 0 in imgs.shape[1:]:
        raise ParseError("images have an empty dimension", offset=8)
    return GrayDataset(imgs.astype(np.float64) / 255.0, labs)


def load_idx(images_path, labels_path) -> GrayDataset:
    with open(images_path, "rb") as f:
        images = f.read()
    with open(labels_path, "rb") as f:
        labels = f.read()
    return parse_idx(images, labels)


def idx_images_bytes(images: np.ndarray) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    return struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape) + images.tobytes()


def idx_labels_bytes(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + labels.tobytes()


def save_idx(images_path, labels_path, images: np.ndarray, labels) -> None:
    with open(images_path, "wb") as f:
        f.write(idx_images_bytes(images))
    with open(labels_path, "wb") as f:
        f.write(idx_labels_bytes(labels))


# -- glyph text ---------------------------------------------------------------------


def parse_glyphs(text: str) -> Dataset:
    records: list[tuple[int, int, list[str]]] = []  # (label, first line number, rows)
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            current = None
            continue
        if current is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "label" or not parts[1].isdigit() or not parts[1].isascii():
                raise ParseError(f"expected 'label <id>', got {line[:40]!r}", line=lineno)
            current = (int(parts[1]), lineno, [])
            records.append(current)
            continue
        bad = set(line) - {".", "#"}
        if bad:
            raise ParseError(f"foreign characters {''.join(sorted(bad))[:10]!r} in glyph row", line=lineno)
        if current[2] and len(line) != len(current[2][0]):
            raise ParseError(f"ragged row: {len(line)} columns, expected {len(current[2][0])}", line=lineno)
        current[2].append(line)
    if not records:
        raise ParseError("empty dataset: no glyph records", line=1)
    dims = None
    grids, labels = [], []
    for label, lineno, rows in records:
        if not rows:
            raise ParseError(f"record for label {label} has no rows", line=lineno)
        d = (len(rows[0]), len(rows))
        if dims is None:
            dims = d
        elif d != dims:
            raise ParseError(f"record is {d[0]}x{d[1]}, earlier records are {dims[0]}x{dims[1]}", line=lineno)
        grids.append(ImageGrid(np.array([[ch == "#" for ch in row] for row in rows], dtype=np.uint8)))
        labels.append(label)
    return Dataset.from_grids(grids, labels)


def parse_glyph_bytes(data: bytes) -> Dataset:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text: {exc.reason}", offset=exc.start) from None
    return parse_glyphs(text)


def load_glyphs(path) -> Dataset:
    with open(path, "rb") as f:
        return parse_glyph_bytes(f.read())


def format_glyphs(ds: Dataset) -> str:
    return "\n".join(f"label {it.label}\n{it.grid.to_text()}\n" for it in ds.items)


def save_glyphs(path, ds: Dataset) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_glyphs(ds))


def is_idx(path) -> bool:
    with open(path, "rb") as f:
        head = f.read(4)
    return len(head) == 4 and head[:2] == b"\x00\x00" and head[2] == 0x08


# -- model file -----------------------------------------------------------------------


def _hexes(a) -> list[str]:
    return [float(v).hex() for v in np.asarray(a, dtype=np.float64).ravel()]


def _decs(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def block_to_dict(block: PairBlock) -> dict:
    d = {"pair": [int(block.pair[0]), int(block.pair[1])], "kind": block.kind}
    if block.kind == "metric":
        d["weights"] = block.weights.w.tolist()
    elif block.kind == "perceptron":
        d["weights"] = _hexes(block.weights)
        d["bias"] = float(block.bias).hex()
        d["decimal"] = {"weights": _decs(block.weights), "bias": float(block.bias)}
    else:
        d["hidden_size"] = block.hidden_size
        d["w_hidden"] = _hexes(block.w_hidden)
        d["b_hidden"] = _hexes(block.b_hidden)
        d["w_out"] = _hexes(block.w_out)
        d["b_out"] = float(block.b_out).hex()
        d["decimal"] = {
            "w_hidden": _decs(block.w_hidden),
            "b_hidden": _decs(block.b_hidden),
            "w_out": _decs(block.w_out),
            "b_out": float(block.b_out),
        }
    return d


def block_bytes(block: PairBlock) -> bytes:
    """Canonical serialized form of one block, for byte-level comparisons."""
    return json.dumps(block_to_dict(block), separators=(",", ":")).encode()


def model_to_dict(e: Ensemble) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "dims": [int(e.dims[0]), int(e.dims[1])],
        "topology": e.variant.value,
        "unit_count": e.unit_count,
        "unit_threshold": e.unit_threshold,
        "class_groups": {str(k): sorted(int(u) for u in v) for k, v in e.class_groups.items()},
        "binarize_threshold": e.binarize_threshold,
        "blocks": [block_to_dict(b) for b in e.blocks.values()],
    }


def dumps_model(e: Ensemble) -> str:
    return json.dumps(model_to_dict(e), indent=1) + "\n"


def save_model(e: Ensemble, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_model(e))
    os.replace(tmp, path)


def _int(v, what: str) -> int:
    if type(v) is not int:
        raise ModelFormatError(f"{what} must be an integer, got {type(v).__name__}")
    return v


def _fromhex(v, what: str) -> float:
    if not isinstance(v, str):
        raise ModelFormatError(f"{what} must be a hex float string")
    try:
        return float.fromhex(v)
    except (ValueError, OverflowError):
        raise ModelFormatError(f"{what}: invalid hex float {v[:30]!r}") from None


def _hexarray(v, n: int, what: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != n:
        raise ModelFormatError(f"{what} must be a list of {n} hex floats")
    return np.array([_fromhex(x, what) for x in v], dtype=np.float64)


def _block_from_dict(d, dims: tuple[int, int]) -> PairBlock:
    if not isinstance(d, dict):
        raise ModelFormatError("block entry must be an object")
    pair = d.get("pair")
    if not isinstance(pair, list) or len(pair) != 2:
        raise ModelFormatError("block pair must be a two-element list")
    pair = (_int(pair[0], "pair"), _int(pair[1], "pair"))
    cols, rows = dims
    cells = cols * rows
    kind = d.get("kind")
    if kind == "metric":
        w = d.get("weights")
        if not isinstance(w, list) or len(w) != rows or any(not isinstance(r, list) or len(r) != cols for r in w):
            raise ModelFormatError(f"metric block {pair}: weights must be {rows} rows of {cols} integers")
        vals = [_int(v, f"metric block {pair} weight") for r in w for v in r]
        if any(abs(v) >= 2**62 for v in vals):
            raise ModelFormatError(f"metric block {pair}: weight out of range")
        arr = np.array(vals, dtype=np.int64).reshape(rows, cols)
        arr.setflags(write=False)
        return MetricBlock(pair, WeightGrid(arr))
    if kind == "perceptron":
        return PerceptronBlock(
            pair, dims, _hexarray(d.get("weights"), cells, f"block {pair} weights"), _fromhex(d.get("bias"), f"block {pair} bias")
        )
    if kind == "sigmoid":
        h = _int(d.get("hidden_size"), "hidden_size")
        if not 1 <= h <= 1_000_000:
            raise ModelFormatError(f"block {pair}: hidden_size must be >= 1")
        return SigmoidBlock(
            pair,
            dims,
            _hexarray(d.get("w_hidden"), h * cells, f"block {pair} w_hidden").reshape(h, cells),
            _hexarray(d.get("b_hidden"), h, f"block {pair} b_hidden"),
            _hexarray(d.get("w_out"), h, f"block {pair} w_out"),
            _fromhex(d.get("b_out"), f"block {pair} b_out"),
        )
    raise ModelFormatError(f"unknown block kind {kind!r}")


def model_from_dict(d) -> Ensemble:
    if not isinstance(d, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = d.get("format_version")
    if version != FORMAT_VERSION or type(version) is not int:
        raise ModelFormatError(f"unsupported format_version {version!r}")
    dims = d.get("dims")
    if not isinstance(dims, list) or len(dims) != 2:
        raise ModelFormatError("dims must be [C, R]")
    dims = (_int(dims[0], "dims"), _int(dims[1], "dims"))
    if dims[0] < 1 or dims[1] < 1 or dims[0] * dims[1] > 1 << 24:
        raise ModelFormatError(f"invalid dims {dims}")
    try:
        variant = Topology(d.get("topology"))
    except ValueError:
        raise ModelFormatError(f"unknown topology {d.get('topology')!r}") from None
    n = _int(d.get("unit_count"), "unit_count")
    if n < 2:
        raise ModelFormatError(f"unit_count must be >= 2, got {n}")
    b = _int(d.get("unit_threshold"), "unit_threshold")
    if b != n - 1:
        raise ModelFormatError(f"invariant violated: unit_threshold {b} != unit_count - 1 = {n - 1}")
    blocks_in = d.get("blocks")
    if not isinstance(blocks_in, list):
        raise ModelFormatError("blocks must be a list")
    want = expected_block_count(n, variant)
    if len(blocks_in) != want:
        raise ModelFormatError(
            f"invariant violated: block count {len(blocks_in)} != {want} required by the {variant.value} wiring for N={n}"
        )
    groups_in = d.get("class_groups")
    if not isinstance(groups_in, dict):
        raise ModelFormatError("class_groups must be an object")
    groups = {}
    for k, units in groups_in.items():
        if not k.isdigit() or not k.isascii() or not isinstance(units, list):
            raise ModelFormatError(f"bad class group {k!r}")
        groups[int(k)] = frozenset(_int(u, "class group unit") for u in units)
    thr = d.get("binarize_threshold")
    if type(thr) not in (int, float) or not 0.0 <= thr <= 1.0:
        raise ModelFormatError("binarize_threshold must be a number in [0, 1]")
    blocks = {}
    for bd in blocks_in:
        blk = _block_from_dict(bd, dims)
        if blk.pair in blocks:
            raise ModelFormatError(f"duplicate block {blk.pair}")
        blocks[blk.pair] = blk
    try:
        return assemble(blocks, groups, variant, dims, float(thr), n_units=n)
    except PairNetError as exc:
        raise ModelFormatError(f"invariant violated: {exc}") from None


def loads_model(text: str | bytes) -> Ensemble:
    """Parse a model document; any defect raises :class:`ModelFormatError`."""
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        doc = json.loads(text)
    except (UnicodeDecodeError, ValueError, RecursionError) as exc:
        raise ModelFormatError(f"malformed model document: {str(exc)[:80]}") from None
    try:
        return model_from_dict(doc)
    except ModelFormatError:
        raise
    except (PairNetError, KeyError, TypeError, ValueError, IndexError, AttributeError, OverflowError, MemoryError) as exc:
        raise ModelFormatError(f"malformed model document: {type(exc).__name__}: {str(exc)[:80]}") from None


def load_model(path) -> Ensemble:
    with open(path, "rb") as f:
        return loads_model(f.read())

"""Saving and loading models and datasets.

Models are JSON with reals stored exactly (hex floats alongside a readable
decimal), so a loaded model predicts exactly like the one that was saved.
"""

import tempfile
from pathlib import Path

import numpy as np

from pairnet import TrainConfig, generate_glyphs, predict_batch, train_ensemble
from pairnet.persist import load_glyphs, load_idx, load_model, save_glyphs, save_idx, save_model

data = generate_glyphs(3, 20, noise=1, seed=4)
net, _ = train_ensemble(data, "sigmoid", TrainConfig.gradient_descent(max_epochs=200), hidden_size=4)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    save_model(net, tmp / "net.json")
    print((tmp / "net.json").read_text()[:300], "...")
    back = load_model(tmp / "net.json")
    xs = data.stack()
    print("identical predictions:", np.array_equal(predict_batch(net, xs).labels, predict_batch(back, xs).labels))

    save_glyphs(tmp / "glyphs.txt", data)
    print("glyph file round trip:", np.array_equal(load_glyphs(tmp / "glyphs.txt").labels, data.labels))

    # IDX stores grayscale bytes; binarize on the way back in.
    save_idx(tmp / "images.idx", tmp / "labels.idx", data.stack() * 255, data.labels)
    again = load_idx(tmp / "images.idx", tmp / "labels.idx")
    print("IDX round trip:", again.binarize(0.5).stack().tolist() == data.stack().tolist())

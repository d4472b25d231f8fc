"""Training pairwise blocks instead of computing them.

A perceptron block learns each class pair from noisy glyphs. A single
perceptron cannot learn XOR, which is where the sigmoid block with a hidden
layer comes in.
"""

import numpy as np

from pairnet import ImageGrid, TrainConfig, generate_glyphs, init_block, predict_batch, train_block, train_ensemble

train = generate_glyphs(classes=3, samples_per_class=200, noise=2, seed=0)
test = generate_glyphs(classes=3, samples_per_class=100, noise=2, seed=1)

net, reports = train_ensemble(train, "perceptron", TrainConfig(max_epochs=200), seed=0)
for pair, rep in reports.items():
    print(pair, f"epochs={rep.epochs_run} errors={rep.final_train_errors} converged={rep.converged}")

got = predict_batch(net, test.stack())
print(f"held-out strict accuracy: {np.mean(got.labels == test.labels):.3f}")

# XOR on two cells: 10 and 01 are positive, 00 and 11 negative.
pos = [ImageGrid.from_text("#."), ImageGrid.from_text(".#")]
neg = [ImageGrid.from_text(".."), ImageGrid.from_text("##")]

_, rep = train_block(init_block("perceptron", (2, 1)), pos, neg, TrainConfig(max_epochs=200))
print("\nperceptron on XOR converged:", rep.converged)

cfg = TrainConfig.gradient_descent(learning_rate=2.0, max_epochs=5000, init_scale=1.0)
block = init_block("sigmoid", (2, 1), hidden_size=8, init_seed=0, init_scale=cfg.init_scale)
block, rep = train_block(block, pos, neg, cfg)
print(f"sigmoid (8 hidden) on XOR converged: {rep.converged} after {rep.epochs_run} epochs")

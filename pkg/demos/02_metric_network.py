"""A nearest-sample network built from three clean letter glyphs.

No training happens here: each block's weights come straight from the
distance fields of two samples, and the network picks the sample an input
is closest to.
"""

from pairnet import alphabet, build_metric_ensemble, flip_cells, predict
import numpy as np

samples = alphabet(3)  # A, B, C on a 5x7 grid
for ch, g in zip("ABC", samples):
    print(ch)
    print(g.to_text(), "\n")

net = build_metric_ensemble(samples)
print(f"{net.variant.value} topology, {net.block_count} blocks, unit threshold {net.unit_threshold}")

for k, g in enumerate(samples):
    print(f"clean {'ABC'[k]} ->", predict(net, g))

# A couple of flipped cells rarely changes the verdict.
rng = np.random.default_rng(0)
noisy = flip_cells(samples[1], 2, rng)
print("\nnoisy B:")
print(noisy.to_text())
print("->", predict(net, noisy))

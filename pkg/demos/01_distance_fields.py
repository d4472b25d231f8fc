"""Distance fields and pair weights on a tiny grid.

Every cell of a sample's distance field holds the squared Euclidean distance
to the nearest active cell. The weight grid for a pair (i, j) is the
difference of the two fields, so summing it over the active cells of an
input compares how far the input sits from each sample.
"""

import numpy as np

from pairnet import ImageGrid, build_pair_weights, distance_field, sample_score, weighted_sum

a = ImageGrid.from_text("#....\n.....\n.....")
b = ImageGrid.from_text(".....\n.....\n....#")

fa, fb = distance_field(a), distance_field(b)
print("distance field of a (squared):")
print(fa.d2)

w = build_pair_weights(fa, fb)
print("\npair weights a vs b:")
print(w.w)

# Swapping the pair negates every weight.
assert np.array_equal(build_pair_weights(fb, fa).w, -w.w)

# An input near a gives a negative sum, so the (a, b) block fires.
x = ImageGrid.from_text("##...\n.....\n.....")
s = weighted_sum(w, x)
print(f"\nsum over x = {s}  (score_a={sample_score(fa, x)}, score_b={sample_score(fb, x)})")
print("block fires" if s < 0 else "block stays silent")

"""Growing a network by one class without touching the existing blocks.

Only the pairs that involve the new class are built; every unit's threshold
goes up by one.
"""

from pairnet import add_class, alphabet, build_metric_ensemble, predict
from pairnet.builders import metric_growth_blocks
from pairnet.persist import block_bytes

samples = alphabet(4)
old = build_metric_ensemble(samples[:3])
new_blocks = metric_growth_blocks(old, samples[:3], samples[3])
grown = add_class(old, new_blocks)

print(f"blocks {old.block_count} -> {grown.block_count}, threshold {old.unit_threshold} -> {grown.unit_threshold}")
same = all(block_bytes(grown.blocks[k]) == block_bytes(b) for k, b in old.blocks.items())
print("old blocks unchanged:", same)

for k, g in enumerate(samples):
    print("ABCD"[k], "->", predict(grown, g))

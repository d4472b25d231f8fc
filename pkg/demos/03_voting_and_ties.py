"""How the voting layers reach a verdict, and what happens on a tie.

Under the full topology both blocks of a pair see the input, so an exact tie
leaves every unit short of its threshold and the network abstains. The
compressed topology keeps one block per pair and derives the reverse bit by
inversion, so a tie goes to the higher-indexed unit.
"""

from pairnet import ImageGrid, build_metric_ensemble, first_layer_bits, predict, predict_max_vote

left = ImageGrid.from_text("#....\n#....\n#....")
right = ImageGrid.from_text("....#\n....#\n....#")
middle = ImageGrid.from_text("..#..\n..#..\n..#..")  # equally far from both

for variant in ("full", "compressed"):
    net = build_metric_ensemble([left, right], variant=variant)
    print(variant)
    print(first_layer_bits(net, middle))
    print("  strict  :", predict(net, middle))
    print("  max-vote:", predict_max_vote(net, middle))

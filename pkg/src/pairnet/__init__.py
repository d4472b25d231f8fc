"""Pairwise image recognition networks.

Binary image grids are classified by a layer of pairwise blocks, each
deciding between two classes, followed by an all-wins threshold layer and
an OR-merge per class. Blocks are either built analytically from sample
images (nearest-sample metric) or trained independently per class pair.
"""

__version__ = "0.1.0"

from .blocks import (
    MetricBlock,
    PerceptronBlock,
    SigmoidBlock,
    TrainConfig,
    TrainReport,
    block_bit,
    block_raw_output,
    init_block,
    train_block,
)
from .builders import build_metric_ensemble, train_ensemble
from .ensemble import (
    Decision,
    Ensemble,
    Topology,
    add_class,
    assemble,
    expected_block_count,
    first_layer_bits,
    growth_delta,
    predict,
    predict_batch,
    predict_max_vote,
    second_layer,
    third_layer,
)
from .errors import PairNetError
from .grid import Dataset, ImageGrid, LabeledImage, active_cells, binarize_grid, validate_dataset
from .metric import build_pair_weights, distance_field, sample_score, threshold_fire, weighted_sum
from .persist import load_glyphs, load_idx, load_model, save_model
from .glyphs import alphabet, flip_cells, generate_glyphs, letter

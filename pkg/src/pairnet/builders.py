"""Constructing ensembles from data: analytic metric networks and trained pairwise ones."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Mapping, Sequence

import numpy as np

from .blocks import PairBlock, TrainConfig, TrainReport, init_block, metric_block, train_block
from .ensemble import Ensemble, Topology, add_class, assemble, growth_pairs, required_pairs
from .errors import ConfigurationError, InsufficientDataError
from .grid import Dataset, ImageGrid
from .metric import build_pair_weights, distance_field


def build_metric_ensemble(
    samples: Sequence[ImageGrid],
    labels: Sequence[int] | None = None,
    variant: Topology | str = Topology.COMPRESSED,
    binarize_threshold: float = 0.5,
) -> Ensemble:
    """Nearest-sample network: one unit per sample, units grouped by label.

    Raises :class:`~pairnet.errors.DegenerateSampleError` for a blank sample.
    """
    if len(samples) < 2:
        raise ConfigurationError("a metric network needs at least 2 samples")
    fields = [distance_field(s) for s in samples]
    blocks = {(i, j): metric_block((i, j), build_pair_weights(fields[i], fields[j])) for i, j in required_pairs(len(samples), variant)}
    if labels is None:
        labels = range(len(samples))
    groups: dict[int, set[int]] = {}
    for unit, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(unit)
    return assemble(blocks, groups, variant, samples[0].dims, binarize_threshold, n_units=len(samples))


def metric_growth_blocks(e: Ensemble, samples: Sequence[ImageGrid], new_sample: ImageGrid) -> dict[tuple[int, int], PairBlock]:
    """Blocks pairing ``new_sample`` with the existing units' samples.

    ``samples[k]`` must be the sample behind unit ``k``.
    """
    new_field = distance_field(new_sample)
    fields = {k: distance_field(s) for k, s in enumerate(samples)}
    n = e.unit_count
    out = {}
    for i, j in growth_pairs(n, e.variant):
        fi = new_field if i == n else fields[i]
        fj = new_field if j == n else fields[j]
        out[(i, j)] = metric_block((i, j), build_pair_weights(fi, fj))
    return out


def block_seeds(pair: tuple[int, int], seed: int) -> tuple[int, int]:
    """Per-block (init_seed, shuffle_seed) derived from the global seed and the pair key."""
    init_seed, shuffle_seed = np.random.SeedSequence([int(seed), int(pair[0]), int(pair[1])]).generate_state(2)
    return int(init_seed), int(shuffle_seed)


def _train_one(pair, kind, dims, pos, neg, cfg, seed, hidden_size):
    init_seed, shuffle_seed = block_seeds(pair, seed)
    cfg = replace(cfg, init_seed=init_seed, shuffle_seed=shuffle_seed)
    block = init_block(kind, dims, pair, hidden_size=hidden_size, init_seed=init_seed, init_scale=cfg.init_scale)
    return train_block(block, pos, neg, cfg)


def train_blocks(
    pairs: Sequence[tuple[int, int]],
    by_class: Mapping[int, Sequence[ImageGrid]],
    kind: str,
    dims: tuple[int, int],
    cfg: TrainConfig,
    seed: int = 0,
    hidden_size: int = 8,
    jobs: int = 1,
) -> tuple[dict[tuple[int, int], PairBlock], dict[tuple[int, int], TrainReport]]:
    """Train one block per pair ``(i, j)`` on class ``i`` (bit 1) versus class ``j``.

    Results are keyed and ordered by pair regardless of completion order.
    """
    missing = sorted({c for p in pairs for c in p if not by_class.get(c)})
    if missing:
        bad = [p for p in pairs if p[0] in missing or p[1] in missing]
        raise InsufficientDataError(f"no examples for classes {missing}; cannot train pairs {bad}")

    def work(pair):
        i, j = pair
        return _train_one(pair, kind, dims, list(by_class[i]), list(by_class[j]), cfg, seed, hidden_size)

    pairs = sorted(pairs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(p) for p in pairs]
    blocks = {p: r[0] for p, r in zip(pairs, results)}
    reports = {p: r[1] for p, r in zip(pairs, results)}
    return blocks, reports


def _by_class(ds: Dataset) -> dict[int, list[ImageGrid]]:
    out: dict[int, list[ImageGrid]] = {}
    for it in ds.items:
        out.setdefault(it.label, []).append(it.grid)
    return out


def train_ensemble(
    ds: Dataset,
    kind: str = "perceptron",
    cfg: TrainConfig | None = None,
    variant: Topology | str = Topology.COMPRESSED,
    seed: int = 0,
    hidden_size: int = 8,
    binarize_threshold: float = 0.5,
    jobs: int = 1,
) -> tuple[Ensemble, dict[tuple[int, int], TrainReport]]:
    """One unit per class, one trained block per class pair."""
    if ds.class_count < 2:
        raise ConfigurationError("need at least 2 classes")
    if cfg is None:
        cfg = TrainConfig() if kind == "perceptron" else TrainConfig.gradient_descent()
    by_class = _by_class(ds)
    pairs = required_pairs(ds.class_count, variant)
    blocks, reports = train_blocks(pairs, by_class, kind, ds.dims, cfg, seed, hidden_size, jobs)
    return assemble(blocks, None, variant, ds.dims, binarize_threshold, n_units=ds.class_count), reports


def grow_trained(
    e: Ensemble,
    old: Dataset,
    new_examples: Sequence[ImageGrid],
    cfg: TrainConfig,
    seed: int = 0,
    jobs: int = 1,
) -> tuple[Ensemble, dict[tuple[int, int], TrainReport]]:
    """Add a class to a trained ensemble (identity grouping) by training only the new pairs."""
    kinds = e.kinds
    if len(kinds) != 1 or "metric" in kinds:
        raise ConfigurationError(f"cannot grow an ensemble of kinds {sorted(kinds)} by training")
    kind = kinds.pop()
    hidden = next(iter(e.blocks.values())).hidden_size if kind == "sigmoid" else 8
    n = e.unit_count
    by_class = _by_class(old)
    by_class[n] = list(new_examples)
    pairs = growth_pairs(n, e.variant)
    blocks, reports = train_blocks(pairs, by_class, kind, e.dims, cfg, seed, hidden, jobs)
    return add_class(e, blocks, n), reports

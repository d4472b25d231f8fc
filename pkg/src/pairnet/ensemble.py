"""Pairwise ensembles: first-layer blocks, all-wins second layer, OR-merge third layer.

A second-layer unit fires only when it wins every one of its ``N - 1``
comparisons (threshold ``B = N - 1``, all weights 1). Units are mapped to
classes through ``class_groups``; a class is active when any of its units
fired.

Two wirings are supported. ``FULL`` keeps a block for every ordered pair
``(k, j)``. ``COMPRESSED`` keeps one block per unordered pair ``i < j``
and feeds its inverted output to unit ``j``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from .blocks import PairBlock
from .errors import ConfigurationError, DimensionError, GrowthError, WiringError
from .grid import ImageGrid, check_dims

NO_DECISION = -1
AMBIGUOUS = -2


class Topology(str, enum.Enum):
    FULL = "full"
    COMPRESSED = "compressed"


def expected_block_count(n_units: int, variant: Topology | str) -> int:
    """``(N - 1) N`` blocks for the full wiring, ``N (N - 1) / 2`` compressed."""
    variant = Topology(variant)
    if n_units < 2:
        raise ConfigurationError(f"need at least 2 units, got {n_units}")
    full = (n_units - 1) * n_units
    return full if variant is Topology.FULL else full // 2


def growth_delta(n_units_before: int, variant: Topology | str) -> int:
    """Blocks added when one unit joins ``n_units_before`` existing ones."""
    variant = Topology(variant)
    if n_units_before < 2:
        raise ConfigurationError(f"need at least 2 units, got {n_units_before}")
    return 2 * n_units_before if variant is Topology.FULL else n_units_before


def required_pairs(n_units: int, variant: Topology | str) -> list[tuple[int, int]]:
    variant = Topology(variant)
    if variant is Topology.FULL:
        return [(k, j) for k in range(n_units) for j in range(n_units) if k != j]
    return [(i, j) for i in range(n_units) for j in range(i + 1, n_units)]


def growth_pairs(n_units_before: int, variant: Topology | str) -> list[tuple[int, int]]:
    """Pair keys the new unit ``n_units_before`` must bring along."""
    n = n_units_before
    if Topology(variant) is Topology.FULL:
        return [(i, n) for i in range(n)] + [(n, i) for i in range(n)]
    return [(i, n) for i in range(n)]


@dataclass(frozen=True, eq=False)
class Ensemble:
    variant: Topology
    unit_count: int
    blocks: Mapping[tuple[int, int], PairBlock]
    class_groups: Mapping[int, frozenset[int]]
    dims: tuple[int, int]
    binarize_threshold: float = 0.5

    @property
    def unit_threshold(self) -> int:
        return self.unit_count - 1

    @property
    def class_count(self) -> int:
        return len(self.class_groups)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def unit_class(self) -> np.ndarray:
        out = np.empty(self.unit_count, dtype=np.int64)
        for k, units in self.class_groups.items():
            for u in units:
                out[u] = k
        return out

    @property
    def kinds(self) -> set[str]:
        return {b.kind for b in self.blocks.values()}


def _check_groups(class_groups: Mapping[int, frozenset[int]], n_units: int) -> None:
    keys = sorted(class_groups)
    if keys != list(range(len(keys))):
        raise WiringError(f"class identifiers must be 0..K-1, got {keys}")
    seen: list[int] = []
    for k in keys:
        units = class_groups[k]
        if not units:
            raise WiringError(f"class {k} has no units")
        seen.extend(units)
    if sorted(seen) != list(range(n_units)):
        raise WiringError(f"class groups must partition units 0..{n_units - 1}")


def assemble(
    blocks: Mapping[tuple[int, int], PairBlock],
    class_groups: Mapping[int, frozenset[int] | set[int] | list[int]] | None = None,
    variant: Topology | str = Topology.COMPRESSED,
    dims: tuple[int, int] | None = None,
    binarize_threshold: float = 0.5,
    n_units: int | None = None,
) -> Ensemble:
    """Validate the block set against the wiring and build an :class:`Ensemble`.

    The unit count comes from ``n_units``, else from ``class_groups``, else
    from the largest index in the block keys. Identity grouping is used
    when ``class_groups`` is omitted.
    """
    variant = Topology(variant)
    blocks = {tuple(map(int, k)): b for k, b in blocks.items()}
    if n_units is None:
        if class_groups is not None:
            n_units = sum(len(v) for v in class_groups.values())
        elif blocks:
            n_units = max(max(k) for k in blocks) + 1
        else:
            raise WiringError("cannot infer unit count from an empty block set")
    if n_units < 2:
        raise WiringError(f"need at least 2 units, got {n_units}")
    need = set(required_pairs(n_units, variant))
    have = set(blocks)
    if have != need:
        missing = sorted(need - have)
        surplus = sorted(have - need)
        raise WiringError(f"{variant.value} wiring for N={n_units}: missing pairs {missing}, surplus pairs {surplus}")
    for key, b in blocks.items():
        if tuple(b.pair) != key:
            raise WiringError(f"block keyed {key} is labeled {b.pair}")
    dimset = {tuple(b.dims) for b in blocks.values()}
    if dims is not None:
        dimset.add(tuple(dims))
    if len(dimset) != 1:
        raise DimensionError(f"blocks disagree on dims: {sorted(dimset)}")
    if class_groups is None:
        class_groups = {k: frozenset([k]) for k in range(n_units)}
    groups = {int(k): frozenset(int(u) for u in v) for k, v in class_groups.items()}
    _check_groups(groups, n_units)
    ordered = {k: blocks[k] for k in sorted(blocks)}
    return Ensemble(
        variant,
        n_units,
        MappingProxyType(ordered),
        MappingProxyType(dict(sorted(groups.items()))),
        dimset.pop(),
        float(binarize_threshold),
    )


# -- layer evaluation ---------------------------------------------------------


def first_layer_bits(e: Ensemble, input: ImageGrid) -> np.ndarray:
    """``b[k, j]`` = 1 when unit ``k`` beats unit ``j``; the diagonal holds -1."""
    check_dims(e.dims, input)
    x = input.flat[None, :]
    n = e.unit_count
    b = np.full((n, n), -1, dtype=np.int8)
    for (i, j), block in e.blocks.items():
        y = int(block.bits(x)[0])
        b[i, j] = y
        if e.variant is Topology.COMPRESSED:
            b[j, i] = 1 - y
    return b


def _as_matrix(e: Ensemble, b) -> np.ndarray:
    n = e.unit_count
    if isinstance(b, Mapping):
        m = np.full((n, n), -1, dtype=np.int64)
        for (k, j), v in b.items():
            if not (0 <= k < n and 0 <= j < n) or k == j:
                raise WiringError(f"bit key {(k, j)} is not an off-diagonal pair for N={n}")
            m[k, j] = int(v)
    else:
        m = np.asarray(b, dtype=np.int64)
        if m.shape != (n, n):
            raise WiringError(f"bit matrix must be {n}x{n}, got {m.shape}")
    off = ~np.eye(n, dtype=bool)
    vals = m[off]
    if not np.isin(vals, (0, 1)).all():
        raise WiringError("bit matrix is incomplete: every off-diagonal entry must be 0 or 1")
    return m


def _votes(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    return np.where(np.eye(n, dtype=bool), 0, m).sum(axis=1)


def second_layer(e: Ensemble, b) -> frozenset[int]:
    """Units whose win count reaches ``N - 1``.

    ``b`` is an ``N x N`` array (diagonal ignored) or a mapping ``{(k, j): bit}``.
    """
    m = _as_matrix(e, b)
    votes = _votes(m)
    return frozenset(int(k) for k in np.flatnonzero(votes >= e.unit_threshold))


def third_layer(e: Ensemble, fired) -> np.ndarray:
    """Per-class bits: 1 when any unit of the class fired."""
    fired = set(fired)
    bad = [u for u in fired if not 0 <= u < e.unit_count]
    if bad:
        raise WiringError(f"unknown units {bad}")
    return np.array([int(len(fired & units) > 0) for _, units in sorted(e.class_groups.items())], dtype=np.uint8)


@dataclass(frozen=True)
class Decision:
    outcome: str  # "class" | "no_decision" | "ambiguous"
    classes: tuple[int, ...]
    votes: tuple[int, ...]
    fired_units: frozenset[int]

    @property
    def label(self) -> int | None:
        return self.classes[0] if self.outcome == "class" else None

    @property
    def code(self) -> int:
        if self.outcome == "class":
            return self.classes[0]
        return NO_DECISION if self.outcome == "no_decision" else AMBIGUOUS

    def __str__(self):
        if self.outcome == "class":
            return f"Class({self.classes[0]})"
        if self.outcome == "no_decision":
            return "NoDecision"
        return f"Ambiguous({list(self.classes)})"


def make_decision(class_bits, votes, fired) -> Decision:
    active = tuple(int(k) for k in np.flatnonzero(np.asarray(class_bits)))
    votes = tuple(int(v) for v in votes)
    fired = frozenset(int(u) for u in fired)
    if len(active) == 1:
        return Decision("class", active, votes, fired)
    if not active:
        return Decision("no_decision", (), votes, fired)
    return Decision("ambiguous", active, votes, fired)


def predict(e: Ensemble, input: ImageGrid) -> Decision:
    b = first_layer_bits(e, input)
    fired = second_layer(e, b)
    return make_decision(third_layer(e, fired), _votes(b.astype(np.int64)), fired)


class MaxVote(NamedTuple):
    label: int
    tie: bool
    votes: tuple[int, ...]


def predict_max_vote(e: Ensemble, input: ImageGrid) -> MaxVote:
    """Class of the unit with the most wins; ties go to the lowest unit index."""
    votes = _votes(first_layer_bits(e, input).astype(np.int64))
    top = votes.max()
    winners = np.flatnonzero(votes == top)
    return MaxVote(int(e.unit_class[winners[0]]), len(winners) > 1, tuple(int(v) for v in votes))


# -- batched evaluation -------------------------------------------------------


@dataclass(frozen=True)
class BatchDecision:
    votes: np.ndarray  # (M, N)
    fired: np.ndarray  # (M, N) bool
    class_bits: np.ndarray  # (M, K) bool
    labels: np.ndarray  # (M,) class id, NO_DECISION or AMBIGUOUS
    fallback: np.ndarray  # (M,) max-vote class id
    fallback_tie: np.ndarray  # (M,) bool


def predict_batch(e: Ensemble, inputs) -> BatchDecision:
    """Vectorized :func:`predict` and :func:`predict_max_vote` over a stack of inputs.

    ``inputs`` is a ``(M, rows, cols)`` 0/1 array or a sequence of grids.
    """
    if not isinstance(inputs, np.ndarray):
        inputs = np.stack([g.cells for g in inputs]) if len(inputs) else np.zeros((0, e.dims[1], e.dims[0]), np.uint8)
    if inputs.ndim != 3 or (inputs.shape[2], inputs.shape[1]) != tuple(e.dims):
        raise DimensionError(f"inputs of shape {inputs.shape} do not match {e.dims[0]}x{e.dims[1]}")
    X = inputs.reshape(inputs.shape[0], -1)
    m, n = X.shape[0], e.unit_count
    votes = np.zeros((m, n), dtype=np.int64)
    for (i, j), block in e.blocks.items():
        y = block.bits(X).astype(np.int64)
        votes[:, i] += y
        if e.variant is Topology.COMPRESSED:
            votes[:, j] += 1 - y
    fired = votes >= e.unit_threshold
    member = np.zeros((n, e.class_count), dtype=np.int64)
    member[np.arange(n), e.unit_class] = 1
    class_bits = (fired.astype(np.int64) @ member) > 0
    active = class_bits.sum(axis=1)
    labels = np.where(active == 1, class_bits.argmax(axis=1), np.where(active == 0, NO_DECISION, AMBIGUOUS))
    top = votes.max(axis=1, keepdims=True)
    at_top = votes == top
    fallback = e.unit_class[at_top.argmax(axis=1)]
    return BatchDecision(votes, fired, class_bits, labels, fallback, at_top.sum(axis=1) > 1)


# -- growth -------------------------------------------------------------------


def add_class(e: Ensemble, new_blocks: Mapping[tuple[int, int], PairBlock], class_id: int | None = None) -> Ensemble:
    """Append one unit; pre-existing blocks are carried over untouched.

    ``class_id`` defaults to a new class ``K``; passing an existing class
    adds the unit to that class's group.
    """
    n = e.unit_count
    need = set(growth_pairs(n, e.variant))
    have = {tuple(map(int, k)) for k in new_blocks}
    if have != need:
        raise GrowthError(
            f"adding unit {n} to a {e.variant.value} ensemble needs pairs {sorted(need)}; "
            f"missing {sorted(need - have)}, surplus {sorted(have - need)}"
        )
    for k, b in new_blocks.items():
        if tuple(b.dims) != tuple(e.dims):
            raise DimensionError(f"new block {k} is {b.dims}, ensemble is {e.dims}")
    if class_id is None:
        class_id = e.class_count
    if not 0 <= class_id <= e.class_count:
        raise GrowthError(f"class id must be an existing class or {e.class_count}, got {class_id}")
    groups = dict(e.class_groups)
    groups[class_id] = frozenset(groups.get(class_id, frozenset()) | {n})
    blocks = dict(e.blocks)
    blocks.update({tuple(map(int, k)): b for k, b in new_blocks.items()})
    return assemble(blocks, groups, e.variant, e.dims, e.binarize_threshold, n_units=n + 1)

"""Pairwise blocks: one unit per class pair emitting a single bit.

Bit 1 means "the input belongs to the first class of the pair". Three
kinds exist:

* ``MetricBlock`` -- fixed integer weights from :mod:`pairnet.metric`;
  fires on a strictly negative weighted sum.
* ``PerceptronBlock`` -- affine threshold unit trained with the classic
  mistake-driven rule; fires on a strictly positive sum.
* ``SigmoidBlock`` -- one hidden sigmoid layer and a sigmoid output,
  trained by full-batch gradient descent on mean squared error; the
  output is binarized at 0.5 (exactly 0.5 maps to 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError, DimensionError, InsufficientDataError, NotTrainableError
from .grid import ImageGrid
from .metric import WeightGrid, threshold_fire

Kind = Literal["metric", "perceptron", "sigmoid"]
Pair = tuple[int, int]


def _ro(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricBlock:
    pair: Pair
    weights: WeightGrid
    kind = "metric"

    @property
    def dims(self) -> tuple[int, int]:
        return self.weights.dims

    def raw(self, X: np.ndarray) -> np.ndarray:
        return X.astype(np.int64) @ self.weights.w.reshape(-1)

    def bits(self, X: np.ndarray) -> np.ndarray:
        return (self.raw(X) < 0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class PerceptronBlock:
    pair: Pair
    dims: tuple[int, int]
    weights: np.ndarray  # (cells,)
    bias: float
    kind = "perceptron"

    def __post_init__(self):
        object.__setattr__(self, "weights", _ro(self.weights))
        object.__setattr__(self, "bias", float(self.bias))
        if self.weights.shape != (self.dims[0] * self.dims[1],):
            raise DimensionError(f"perceptron needs {self.dims[0] * self.dims[1]} weights, got {self.weights.shape}")

    def raw(self, X: np.ndarray) -> np.ndarray:
        return X.astype(np.float64) @ self.weights + self.bias

    def bits(self, X: np.ndarray) -> np.ndarray:
        return (self.raw(X) > 0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class SigmoidBlock:
    pair: Pair
    dims: tuple[int, int]
    w_hidden: np.ndarray  # (hidden, cells)
    b_hidden: np.ndarray  # (hidden,)
    w_out: np.ndarray  # (hidden,)
    b_out: float
    kind = "sigmoid"

    def __post_init__(self):
        for name in ("w_hidden", "b_hidden", "w_out"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        object.__setattr__(self, "b_out", float(self.b_out))
        h = self.hidden_size
        cells = self.dims[0] * self.dims[1]
        if h < 1 or self.w_hidden.shape != (h, cells) or self.w_out.shape != (h,):
            raise DimensionError(
                f"inconsistent sigmoid block shapes: w_hidden {self.w_hidden.shape}, "
                f"b_hidden {self.b_hidden.shape}, w_out {self.w_out.shape} for {cells} cells"
            )

    @property
    def hidden_size(self) -> int:
        return self.b_hidden.shape[0] if self.b_hidden.ndim == 1 else -1

    def raw(self, X: np.ndarray) -> np.ndarray:
        h = expit(X.astype(np.float64) @ self.w_hidden.T + self.b_hidden)
        return expit(h @ self.w_out + self.b_out)

    def bits(self, X: np.ndarray) -> np.ndarray:
        return (self.raw(X) > 0.5).astype(np.uint8)


PairBlock = Union[MetricBlock, PerceptronBlock, SigmoidBlock]


@dataclass(frozen=True)
class TrainConfig:
    algorithm: Literal["perceptron-rule", "gradient-descent"] = "perceptron-rule"
    learning_rate: float = 0.5
    max_epochs: int = 1000
    shuffle_seed: int = 0
    init_seed: int = 0
    init_scale: float = 0.1
    target_train_errors: int = 0

    def __post_init__(self):
        if self.algorithm not in ("perceptron-rule", "gradient-descent"):
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0")
        if self.max_epochs < 1:
            raise ConfigurationError("max_epochs must be >= 1")
        if self.target_train_errors < 0:
            raise ConfigurationError("target_train_errors must be >= 0")

    @classmethod
    def gradient_descent(cls, **kw) -> "TrainConfig":
        kw.setdefault("learning_rate", 0.1)
        return cls(algorithm="gradient-descent", **kw)


ALGORITHM_FOR_KIND = {"perceptron": "perceptron-rule", "sigmoid": "gradient-descent"}


@dataclass(frozen=True)
class TrainReport:
    epochs_run: int
    final_train_errors: int
    converged: bool
    loss_trace: tuple[float, ...] = field(default_factory=tuple)


def _flatten(grids: Sequence[ImageGrid] | ImageGrid, dims) -> np.ndarray:
    if isinstance(grids, ImageGrid):
        grids = [grids]
    for g in grids:
        if g.dims != tuple(dims):
            raise DimensionError(f"input is {g.dims[0]}x{g.dims[1]}, block expects {dims[0]}x{dims[1]}")
    return np.stack([g.flat for g in grids]) if len(grids) else np.zeros((0, dims[0] * dims[1]), np.uint8)


def init_block(
    kind: Kind,
    dims: tuple[int, int],
    pair: Pair = (0, 1),
    hidden_size: int = 8,
    init_seed: int = 0,
    init_scale: float = 0.1,
) -> PairBlock:
    """Fresh trainable block with parameters uniform in ``[-init_scale, init_scale]``."""
    cols, rows = dims
    if cols < 1 or rows < 1:
        raise DimensionError(f"invalid dims {dims}")
    if pair[0] == pair[1]:
        raise ConfigurationError(f"block pair must join two different units, got {pair}")
    if init_scale < 0:
        raise ConfigurationError("init_scale must be >= 0")
    cells = cols * rows
    rng = np.random.default_rng(init_seed)
    u = lambda *shape: rng.uniform(-init_scale, init_scale, size=shape)  # noqa: E731
    if kind == "perceptron":
        return PerceptronBlock(tuple(pair), (cols, rows), u(cells), float(u(1)[0]))
    if kind == "sigmoid":
        if hidden_size < 1:
            raise ConfigurationError("hidden_size must be >= 1")
        return SigmoidBlock(tuple(pair), (cols, rows), u(hidden_size, cells), u(hidden_size), u(hidden_size), float(u(1)[0]))
    if kind == "metric":
        raise ConfigurationError("metric blocks are built from samples, not initialized")
    raise ConfigurationError(f"unknown block kind {kind!r}")


def block_raw_output(block: PairBlock, input: ImageGrid) -> float:
    """Pre-binarizer value: integer sum (metric), affine sum (perceptron) or sigmoid output."""
    X = _flatten(input, block.dims)
    v = block.raw(X)[0]
    return int(v) if block.kind == "metric" else float(v)


def block_bit(block: PairBlock, input: ImageGrid) -> int:
    raw = block_raw_output(block, input)
    if block.kind == "metric":
        return threshold_fire(raw)
    if block.kind == "perceptron":
        return 1 if raw > 0 else 0
    return 1 if raw > 0.5 else 0


# -- sigmoid loss and gradient ------------------------------------------------


def sigmoid_params(block: SigmoidBlock) -> np.ndarray:
    return np.concatenate([block.w_hidden.ravel(), block.b_hidden, block.w_out, [block.b_out]])


def with_sigmoid_params(block: SigmoidBlock, theta: np.ndarray) -> SigmoidBlock:
    h, cells = block.w_hidden.shape
    i = 0
    w_hidden = theta[i : i + h * cells].reshape(h, cells)
    i += h * cells
    b_hidden = theta[i : i + h]
    i += h
    w_out = theta[i : i + h]
    i += h
    return replace(block, w_hidden=w_hidden, b_hidden=b_hidden, w_out=w_out, b_out=float(theta[i]))


def sigmoid_loss_and_grad(block: SigmoidBlock, X: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient, flattened in :func:`sigmoid_params` order."""
    X = X.astype(np.float64)
    t = targets.astype(np.float64)
    m = X.shape[0]
    h = expit(X @ block.w_hidden.T + block.b_hidden)
    o = expit(h @ block.w_out + block.b_out)
    err = o - t
    loss = float(np.mean(err * err))
    dz2 = (2.0 / m) * err * o * (1.0 - o)
    g_w_out = h.T @ dz2
    g_b_out = dz2.sum()
    dz1 = np.outer(dz2, block.w_out) * h * (1.0 - h)
    g_w_hidden = dz1.T @ X
    g_b_hidden = dz1.sum(axis=0)
    return loss, np.concatenate([g_w_hidden.ravel(), g_b_hidden, g_w_out, [g_b_out]])


# -- training -----------------------------------------------------------------


def _train_perceptron(block: PerceptronBlock, X, t, cfg: TrainConfig):
    rng = np.random.default_rng(cfg.shuffle_seed)
    w = np.array(block.weights, dtype=np.float64)
    b = float(block.bias)
    Xf = X.astype(np.float64)
    lr = cfg.learning_rate
    errors = len(t)
    epochs = 0
    for epochs in range(1, cfg.max_epochs + 1):
        for idx in rng.permutation(len(t)):
            pred = 1 if Xf[idx] @ w + b > 0 else 0
            delta = t[idx] - pred
            if delta:
                w += (lr * delta) * Xf[idx]
                b += lr * delta
        errors = int(np.count_nonzero(((Xf @ w + b) > 0).astype(np.int64) != t))
        if errors <= cfg.target_train_errors:
            break
    trained = replace(block, weights=w, bias=b)
    return trained, TrainReport(epochs, errors, errors <= cfg.target_train_errors)


def _train_sigmoid(block: SigmoidBlock, X, t, cfg: TrainConfig):
    theta = sigmoid_params(block).copy()
    current = block
    trace = []
    errors = len(t)
    epochs = 0
    for epochs in range(1, cfg.max_epochs + 1):
        loss, grad = sigmoid_loss_and_grad(current, X, t)
        trace.append(loss)
        theta -= cfg.learning_rate * grad
        current = with_sigmoid_params(block, theta)
        errors = int(np.count_nonzero(current.bits(X).astype(np.int64) != t))
        if errors <= cfg.target_train_errors:
            break
    return current, TrainReport(epochs, errors, errors <= cfg.target_train_errors, tuple(trace))


def train_block(
    block: PairBlock, pos: Sequence[ImageGrid], neg: Sequence[ImageGrid], cfg: TrainConfig
) -> tuple[PairBlock, TrainReport]:
    """Train ``block`` to output 1 on ``pos`` (first class) and 0 on ``neg``.

    Only ``pos`` and ``neg`` are read. The input block is left untouched;
    a new block is returned together with its report.
    """
    if block.kind == "metric":
        raise NotTrainableError("metric blocks have analytic weights and cannot be trained")
    if not pos or not neg:
        raise InsufficientDataError(f"block {block.pair} needs examples of both classes (pos={len(pos)}, neg={len(neg)})")
    if ALGORITHM_FOR_KIND[block.kind] != cfg.algorithm:
        raise ConfigurationError(f"{block.kind} blocks train with {ALGORITHM_FOR_KIND[block.kind]}, not {cfg.algorithm}")
    X = np.concatenate([_flatten(pos, block.dims), _flatten(neg, block.dims)])
    t = np.concatenate([np.ones(len(pos), np.int64), np.zeros(len(neg), np.int64)])
    if block.kind == "perceptron":
        return _train_perceptron(block, X, t, cfg)
    return _train_sigmoid(block, X, t, cfg)


def metric_block(pair: Pair, weights: WeightGrid) -> MetricBlock:
    if pair[0] == pair[1]:
        raise ConfigurationError(f"block pair must join two different units, got {pair}")
    return MetricBlock(tuple(pair), weights)

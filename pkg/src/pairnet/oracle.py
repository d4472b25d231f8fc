"""Brute-force reference implementations for the test suite.

Nothing here calls into :mod:`pairnet.metric` or the evaluation code in
:mod:`pairnet.ensemble`; the duplication is deliberate. Only the
:class:`~pairnet.ensemble.Decision` record type is shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .ensemble import Decision
from .errors import DegenerateSampleError, DimensionError, WiringError
from .grid import ImageGrid


@dataclass(frozen=True)
class OracleVerdict:
    decision: Decision
    scores: tuple[int, ...]


def _points(grid: ImageGrid) -> list[tuple[int, int]]:
    pts = []
    rows, cols = grid.cells.shape
    for r in range(rows):
        for c in range(cols):
            if grid.cells[r, c]:
                pts.append((c, r))
    return pts


def _nearest_sq(p, pts) -> int:
    best = None
    for c, r in pts:
        d = (c - p[0]) ** 2 + (r - p[1]) ** 2
        if best is None or d < best:
            best = d
    return best


def _verdict_from_scores(scores: Sequence[int]) -> Decision:
    n = len(scores)
    wins = [sum(1 for j in range(n) if j != k and scores[k] < scores[j]) for k in range(n)]
    lo = min(scores)
    argmins = [k for k in range(n) if scores[k] == lo]
    if len(argmins) == 1:
        return Decision("class", (argmins[0],), tuple(wins), frozenset(argmins))
    return Decision("no_decision", (), tuple(wins), frozenset())


def _check(samples: Sequence[ImageGrid], dims) -> list[list[tuple[int, int]]]:
    if not samples:
        raise DegenerateSampleError("no samples")
    out = []
    for s in samples:
        if s.dims != dims:
            raise DimensionError(f"sample {s.dims} vs input {dims}")
        pts = _points(s)
        if not pts:
            raise DegenerateSampleError("sample has no active cells")
        out.append(pts)
    return out


def metric_oracle(samples: Sequence[ImageGrid], input: ImageGrid) -> OracleVerdict:
    """Nearest-sample verdict by direct summation of squared nearest distances.

    Unit ``k`` (sample ``k``) wins when its score is the unique strict minimum.
    """
    sample_pts = _check(samples, input.dims)
    xs = _points(input)
    scores = [sum(_nearest_sq(p, pts) for p in xs) for pts in sample_pts]
    return OracleVerdict(_verdict_from_scores(scores), tuple(scores))


@dataclass(frozen=True)
class BatchOracle:
    scores: np.ndarray  # (M, N)
    labels: np.ndarray  # (M,) argmin or -1 on tie
    wins: np.ndarray  # (M, N)


def metric_oracle_batch(samples: Sequence[ImageGrid], inputs: np.ndarray) -> BatchOracle:
    """Same rule as :func:`metric_oracle` over a ``(M, rows, cols)`` stack.

    The per-cell nearest distances come from the same plain double loop;
    only the final summation over inputs is vectorized.
    """
    rows, cols = inputs.shape[1:]
    sample_pts = _check(samples, (cols, rows))
    table = np.zeros((rows * cols, len(samples)), dtype=np.int64)
    for k, pts in enumerate(sample_pts):
        for r in range(rows):
            for c in range(cols):
                table[r * cols + c, k] = _nearest_sq((c, r), pts)
    scores = inputs.reshape(inputs.shape[0], -1).astype(np.int64) @ table
    lo = scores.min(axis=1, keepdims=True)
    unique = (scores == lo).sum(axis=1) == 1
    labels = np.where(unique, scores.argmin(axis=1), -1)
    wins = (scores[:, :, None] < scores[:, None, :]).sum(axis=2)
    return BatchOracle(scores, labels, wins)


def tournament_oracle(b, n: int) -> OracleVerdict:
    """Count each unit's wins by scanning the bit matrix; fire at ``n - 1``."""
    wins = []
    for k in range(n):
        count = 0
        for j in range(n):
            if j == k:
                continue
            try:
                v = int(b[k][j])
            except (IndexError, KeyError, TypeError):
                raise WiringError(f"missing entry ({k}, {j})") from None
            if v not in (0, 1):
                raise WiringError(f"entry ({k}, {j}) is {v}, not a bit")
            count += v
        wins.append(count)
    fired = [k for k in range(n) if wins[k] >= n - 1]
    if len(fired) == 1:
        d = Decision("class", (fired[0],), tuple(wins), frozenset(fired))
    elif not fired:
        d = Decision("no_decision", (), tuple(wins), frozenset())
    else:
        d = Decision("ambiguous", tuple(fired), tuple(wins), frozenset(fired))
    return OracleVerdict(d, tuple(wins))


def linearly_separable(pos: np.ndarray, neg: np.ndarray) -> bool:
    """Whether some ``w, b`` gives ``w.x + b >= 1`` on ``pos`` and ``<= -1`` on ``neg``.

    Decided exactly as a linear-programming feasibility problem.
    """
    pos = np.asarray(pos, dtype=np.float64).reshape(len(pos), -1)
    neg = np.asarray(neg, dtype=np.float64).reshape(len(neg), -1)
    d = pos.shape[1]
    # variables: w (d), b; constraints A @ [w, b] <= -1
    A = np.vstack([-np.hstack([pos, np.ones((len(pos), 1))]), np.hstack([neg, np.ones((len(neg), 1))])])
    res = linprog(np.zeros(d + 1), A_ub=A, b_ub=-np.ones(len(A)), bounds=[(None, None)] * (d + 1), method="highs")
    return res.status == 0

"""Finite-alphabet bipartite correlation boxes.

A correlation box maps an input pair (x, y) to a joint probability
distribution over an output pair (a, b).  Boxes are stored as dense
float64 tables indexed [x, y, a, b] and are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12
NS_TOL = 1e-10


@dataclass(frozen=True)
class JointDistribution:
    """Joint distribution over (a, b) for one fixed input pair."""

    probs: np.ndarray  # shape (a_size, b_size)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ValueError("probs must be a 2-d array indexed [a, b]")
        if np.any(probs < -NORM_TOL):
            raise ValueError("negative probability entry")
        if abs(probs.sum() - 1.0) > NORM_TOL:
            raise ValueError("probabilities do not sum to 1 within %g" % NORM_TOL)
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def a_size(self) -> int:
        return self.probs.shape[0]

    @property
    def b_size(self) -> int:
        return self.probs.shape[1]

    def marginal_a(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def tv(self, other: "JointDistribution") -> float:
        if self.probs.shape != other.probs.shape:
            raise ValueError("alphabet mismatch")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


@dataclass(frozen=True)
class CorrelationBox:
    """Stochastic map (x, y) -> distribution over (a, b), stored exactly."""

    table: np.ndarray  # shape (x_size, y_size, a_size, b_size)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.float64)
        if table.ndim != 4:
            raise ValueError("table must be 4-d, indexed [x, y, a, b]")
        if min(table.shape) < 1:
            raise ValueError("alphabet sizes must be positive")
        if np.any(table < -NORM_TOL):
            raise ValueError("negative probability entry")
        sums = table.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > NORM_TOL):
            raise ValueError("some output distribution does not sum to 1 within %g"
                             % NORM_TOL)
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def x_size(self) -> int:
        return self.table.shape[0]

    @property
    def y_size(self) -> int:
        return self.table.shape[1]

    @property
    def a_size(self) -> int:
        return self.table.shape[2]

    @property
    def b_size(self) -> int:
        return self.table.shape[3]

    def __call__(self, x: int, y: int) -> JointDistribution:
        self._check_inputs(x, y)
        return JointDistribution(self.table[x, y])

    def _check_inputs(self, x: int, y: int) -> None:
        if not (0 <= x < self.x_size and 0 <= y < self.y_size):
            raise ValueError("input pair (%r, %r) out of range" % (x, y))

    def same_alphabets(self, other: "CorrelationBox") -> bool:
        return self.table.shape == other.table.shape


def pr_box() -> CorrelationBox:
    """The Popescu-Rohrlich box: (0, xy) or (1, 1-xy), each with probability 1/2."""
    table = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            table[x, y, 0, x * y] = 0.5
            table[x, y, 1, 1 - x * y] = 0.5
    return CorrelationBox(table)


def local_box(f, g, a_size: int | None = None, b_size: int | None = None) -> CorrelationBox:
    """Deterministic local box: output point mass at (f(x), g(y)).

    ``f`` and ``g`` are given as integer sequences indexed by input symbol.
    """
    f = [int(v) for v in f]
    g = [int(v) for v in g]
    if a_size is None:
        a_size = max(f) + 1
    if b_size is None:
        b_size = max(g) + 1
    if any(not 0 <= v < a_size for v in f) or any(not 0 <= v < b_size for v in g):
        raise ValueError("output map value out of range")
    table = np.zeros((len(f), len(g), a_size, b_size))
    for x, fx in enumerate(f):
        for y, gy in enumerate(g):
            table[x, y, fx, gy] = 1.0
    return CorrelationBox(table)


def mix(boxes, weights) -> CorrelationBox:
    """Entrywise convex combination of boxes with shared alphabets."""
    boxes = list(boxes)
    weights = np.asarray(weights, dtype=np.float64)
    if len(boxes) == 0 or len(boxes) != len(weights):
        raise ValueError("need one weight per box")
    if np.any(weights < -NORM_TOL):
        raise ValueError("negative mixture weight")
    if abs(weights.sum() - 1.0) > NORM_TOL:
        raise ValueError("mixture weights do not sum to 1 within %g" % NORM_TOL)
    shape = boxes[0].table.shape
    if any(b.table.shape != shape for b in boxes):
        raise ValueError("alphabet mismatch among mixture components")
    table = np.zeros(shape)
    for w, b in zip(weights, boxes):
        table += w * b.table
    return CorrelationBox(table)


def prob(box: CorrelationBox, x: int, y: int, a: int, b: int) -> float:
    box._check_inputs(x, y)
    if not (0 <= a < box.a_size and 0 <= b < box.b_size):
        raise ValueError("output pair (%r, %r) out of range" % (a, b))
    return float(box.table[x, y, a, b])


def sample(box: CorrelationBox, x: int, y: int, rng: np.random.Generator) -> tuple[int, int]:
    """Draw one (a, b) from the exact output distribution at (x, y)."""
    box._check_inputs(x, y)
    flat = box.table[x, y].ravel()
    idx = rng.choice(flat.size, p=flat / flat.sum())
    return int(idx) // box.b_size, int(idx) % box.b_size


def tv_closeness(box1: CorrelationBox, box2: CorrelationBox) -> float:
    """Max over input pairs of the TV distance between output distributions.

    Two boxes are epsilon-close iff this value is <= epsilon.
    """
    if not box1.same_alphabets(box2):
        raise ValueError("alphabet mismatch")
    per_input = 0.5 * np.abs(box1.table - box2.table).sum(axis=(2, 3))
    return float(per_input.max())


def marginal_a(box: CorrelationBox, x: int, y: int) -> np.ndarray:
    box._check_inputs(x, y)
    return box.table[x, y].sum(axis=1)


def marginal_b(box: CorrelationBox, x: int, y: int) -> np.ndarray:
    box._check_inputs(x, y)
    return box.table[x, y].sum(axis=0)


def is_nonsignaling(box: CorrelationBox, tol: float = NS_TOL) -> bool:
    """True iff Alice's marginal is independent of y and Bob's of x, within tol."""
    marg_a = box.table.sum(axis=3)          # [x, y, a]
    marg_b = box.table.sum(axis=2)          # [x, y, b]
    dev_a = np.abs(marg_a - marg_a[:, :1, :]).max()
    dev_b = np.abs(marg_b - marg_b[:1, :, :]).max()
    return bool(dev_a <= tol and dev_b <= tol)


def box_to_json(box: CorrelationBox) -> str:
    """Serialize to the canonical JSON format; round-trips doubles exactly."""
    payload = {
        "x_size": box.x_size,
        "y_size": box.y_size,
        "a_size": box.a_size,
        "b_size": box.b_size,
        "table": [
            [box.table[x, y].ravel().tolist() for y in range(box.y_size)]
            for x in range(box.x_size)
        ],
    }
    return json.dumps(payload)


def box_from_json(text: str) -> CorrelationBox:
    payload = json.loads(text)
    x_size, y_size = payload["x_size"], payload["y_size"]
    a_size, b_size = payload["a_size"], payload["b_size"]
    table = np.empty((x_size, y_size, a_size, b_size))
    for x in range(x_size):
        for y in range(y_size):
            row = np.asarray(payload["table"][x][y], dtype=np.float64)
            if row.size != a_size * b_size:
                raise ValueError("table row has wrong length")
            table[x, y] = row.reshape(a_size, b_size)
    return CorrelationBox(table)

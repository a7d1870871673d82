"""Linear benchmark with a closed-form solution.

The solution is a rotation of a fixed diagonal spectrum with known
exponential growth, so the optimal rank-r error is exactly the tail of
that spectrum.  Both rows and columns of the right-hand side couple
densely (every row depends on every row), which is declared through a
fully-coupled adjacency; at this problem size the dense fallback inside
the stepper is cheap, and the case exercises exactly that path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..integrators import MdeModel
from ..kernels import matrix_exponential
from ..sampling import AdjacencyMap


@dataclass(frozen=True)
class ToySpec:
    n: int = 100
    seed: int = 1
    rank_deficient: bool = False
    t_final: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")


class ToyModel(MdeModel):
    def __init__(self, spec: ToySpec):
        self.spec = spec
        n = spec.n
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0,)))
        w1_raw = rng.uniform(size=(n, n))
        w2_raw = rng.uniform(size=(n, n))
        self.w1 = 0.5 * (w1_raw - w1_raw.T)
        self.w2 = 0.5 * (w2_raw - w2_raw.T)
        d = 0.5 ** np.arange(1, n + 1)
        if spec.rank_deficient:
            d[5:] = 0.0
        self.d = d
        self.n = n
        self.s = n
        self.adjacency = AdjacencyMap(
            neighbors=lambda rows: np.arange(n, dtype=np.int64),
            max_width=n,
            full_coupling=True,
        )

    def initial_value(self) -> np.ndarray:
        return np.diag(self.d)

    def rhs_full(self, t, v):
        return self.w1 @ v + v + v @ self.w2.T

    def rhs_cols(self, t, v_cols, cols):
        # Columns couple through the right multiplication, so this is only
        # exact when all columns are passed (the stepper's dense path does).
        if len(cols) != self.s:
            raise ValueError("column evaluation needs all columns (dense coupling)")
        return self.rhs_full(t, v_cols)

    def rhs_rows(self, t, v_sub, rows, adjacent):
        order = np.concatenate([np.asarray(rows), np.asarray(adjacent)])
        if len(order) != self.n:
            raise ValueError("row evaluation needs all rows (dense coupling)")
        v = np.empty_like(v_sub)
        v[order, :] = v_sub
        return self.w1[rows, :] @ v + v[rows, :] + v[rows, :] @ self.w2.T

    def exact(self, t: float) -> np.ndarray:
        """Closed-form solution: growth of the diagonal spectrum under two rotations."""
        left = matrix_exponential(t * self.w1)
        right = matrix_exponential(t * self.w2)
        return left @ (np.exp(t) * np.diag(self.d)) @ right.T


def toy_model(spec: ToySpec) -> tuple[ToyModel, Callable[[float], np.ndarray]]:
    model = ToyModel(spec)
    return model, model.exact

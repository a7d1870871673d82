"""Advection-diffusion-reaction equation with a random diffusion coefficient.

Two-dimensional tensor grid, row-major flattening (row index
i = iy * nx + ix), 5-point stencils.  Each column carries its own
diffusion coefficient alpha = 1/xi with xi drawn from a truncated
normal (draws at or below 10 are rejected and redrawn, keeping alpha
bounded).  The velocity is a prescribed steady channel profile aligned
with x1; the reaction v^2/(10 + v) is non-polynomial on purpose.

Boundaries: homogeneous Dirichlet on the left/top/bottom edges
(those rows are pinned: zero right-hand side, zeroed initial data) and
a zero-gradient outflow on the right edge via a mirrored ghost value.
The initial condition is a deterministic band, identical in every
column, so the exact initial rank is one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..integrators import MdeModel
from ..sampling import AdjacencyMap


@dataclass(frozen=True)
class AdrSpec:
    nx: int = 128
    ny: int = 64
    s: int = 1000
    seed: int = 5
    xi_mean: float = 100.0
    xi_std: float = 25.0
    u_max: float = 1.0
    with_reaction: bool = True
    neumann_outflow: bool = True
    dt: float = 5e-4
    t_final: float = 5.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid too small")


class AdrModel(MdeModel):
    def __init__(self, spec: AdrSpec):
        self.spec = spec
        nx, ny, s = spec.nx, spec.ny, spec.s
        self.nx, self.ny = nx, ny
        self.n = nx * ny
        self.s = s
        self.x1 = np.linspace(0.0, 10.0, nx)
        self.x2 = np.linspace(-1.0, 1.0, ny)
        self.dx1 = self.x1[1] - self.x1[0]
        self.dx2 = self.x2[1] - self.x2[0]
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2,)))
        xi = rng.normal(spec.xi_mean, spec.xi_std, size=s)
        bad = xi <= 10.0
        self.resampled = int(bad.sum())
        while bad.any():
            xi[bad] = rng.normal(spec.xi_mean, spec.xi_std, size=int(bad.sum()))
            bad = xi <= 10.0
            self.resampled += int(bad.sum())
        self.alpha = 1.0 / xi
        self.u1 = spec.u_max * (1.0 - self.x2**2)
        iy, ix = np.divmod(np.arange(self.n), nx)
        self._iy, self._ix = iy, ix
        dirichlet = (ix == 0) | (iy == 0) | (iy == ny - 1)
        if not spec.neumann_outflow:
            dirichlet |= ix == nx - 1
        self.dirichlet = dirichlet
        self.adjacency = AdjacencyMap(neighbors=self._neighbors, max_width=4)

    # -- data ---------------------------------------------------------------

    def initial_column(self) -> np.ndarray:
        band = 0.5 * (np.tanh((self.x2 + 0.5) / 0.1) - np.tanh((self.x2 - 0.5) / 0.1))
        v = band[self._iy].copy()
        v[self.dirichlet] = 0.0
        return v

    def initial_factors(self) -> tuple[np.ndarray, np.ndarray]:
        col = self.initial_column()
        return col[:, None], np.ones((self.s, 1))

    def initial_value(self) -> np.ndarray:
        return np.tile(self.initial_column()[:, None], (1, self.s))

    def reaction(self, v):
        return v * v / (10.0 + v)

    # -- right-hand side ----------------------------------------------------

    def _rhs_grid(self, w: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """RHS on a (c, ny, nx) sample-major view.

        Sample-major layout keeps the stencil slices contiguous along x,
        which is what makes the vectorized differences fast.
        """
        inv_dx1sq = 1.0 / self.dx1**2
        inv_dx2sq = 1.0 / self.dx2**2
        out = np.zeros_like(w)
        center = w[:, 1:-1, 1:-1]
        east, west = w[:, 1:-1, 2:], w[:, 1:-1, :-2]
        north, south = w[:, 2:, 1:-1], w[:, :-2, 1:-1]
        lap = (east + west - 2.0 * center) * inv_dx1sq
        lap += (north + south - 2.0 * center) * inv_dx2sq
        lap *= alpha[:, None, None]
        lap -= (self.u1[None, 1:-1, None] / (2.0 * self.dx1)) * (east - west)
        out[:, 1:-1, 1:-1] = lap
        if self.spec.neumann_outflow:
            # mirrored ghost at the right edge: zero x1-gradient, no advection
            edge = 2.0 * (w[:, 1:-1, -2] - w[:, 1:-1, -1]) * inv_dx1sq
            edge += (w[:, 2:, -1] + w[:, :-2, -1] - 2.0 * w[:, 1:-1, -1]) * inv_dx2sq
            out[:, 1:-1, -1] = edge * alpha[:, None]
        if self.spec.with_reaction:
            out[:, 1:-1, 1:] += self.reaction(w[:, 1:-1, 1:])
        return out

    def rhs_full(self, t, v):
        return self.rhs_cols(t, v, np.arange(v.shape[1]))

    def rhs_cols(self, t, v_cols, cols):
        w = np.ascontiguousarray(v_cols.reshape(self.ny, self.nx, -1).transpose(2, 0, 1))
        out = self._rhs_grid(w, self.alpha[np.asarray(cols)])
        out = out.transpose(1, 2, 0).reshape(self.n, -1)
        out[self.dirichlet] = 0.0
        return np.ascontiguousarray(out)

    def rhs_rows(self, t, v_sub, rows, adjacent):
        rows = np.asarray(rows, dtype=np.int64)
        cat = np.concatenate([rows, np.asarray(adjacent, dtype=np.int64)])
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[cat] = np.arange(len(cat))
        out = np.zeros((len(rows), v_sub.shape[1]))
        live = ~self.dirichlet[rows]
        if not live.any():
            return out
        rl = rows[live]
        center = v_sub[pos[rl]]
        down = v_sub[pos[rl - self.nx]]
        up = v_sub[pos[rl + self.nx]]
        left = v_sub[pos[rl - 1]]
        at_right = self._ix[rl] == self.nx - 1
        right = np.where(
            at_right[:, None], v_sub[pos[rl - 1]], v_sub[pos[np.minimum(rl + 1, self.n - 1)]]
        )
        lap = (right - 2.0 * center + left) / self.dx1**2 + (
            up - 2.0 * center + down
        ) / self.dx2**2
        speed = np.where(at_right, 0.0, self.u1[self._iy[rl]])
        adv = speed[:, None] * (right - left) / (2.0 * self.dx1)
        val = -adv + self.alpha[None, :] * lap
        if self.spec.with_reaction:
            val = val + self.reaction(center)
        out[live] = val
        return out

    def _neighbors(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        live = rows[~self.dirichlet[rows]]
        if not len(live):
            return rows[:0]
        at_right = self._ix[live] == self.nx - 1
        pieces = [live - 1, live - self.nx, live + self.nx, live[~at_right] + 1]
        return np.unique(np.concatenate(pieces))


def adr_model(spec: AdrSpec) -> tuple[AdrModel, tuple[np.ndarray, np.ndarray]]:
    model = AdrModel(spec)
    return model, model.initial_factors()

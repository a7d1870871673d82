"""Viscous Burgers equation with random initial and boundary data.

One spatial dimension on [0, 1], second-order central differences on a
uniform grid, columns are independent random samples.  The left
boundary value is a deterministic wave plus a random series; both
boundaries are enforced weakly through a penalty term in the right-hand
side, so boundary rows evolve like every other row and the sampled row
evaluation needs no special casing.

The initial condition is a deterministic profile plus a truncated
expansion in the eigenfunctions of a squared-exponential kernel; it has
numerical rank d + 1. The expansion coefficients xi are standard normal
and the amplitude sigma_noise multiplies both the initial and the
boundary series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..integrators import MdeModel
from ..sampling import AdjacencyMap

#: Grid size above which kernel eigenpairs are computed on a coarse grid
#: and interpolated (the dense eigensolve is cubic in n; the modes are
#: smooth so interpolation is exact to plotting accuracy).
_KL_DIRECT_LIMIT = 801


@dataclass(frozen=True)
class BurgersSpec:
    n: int = 401
    s: int = 256
    nu: float = 2.5e-3
    d: int = 17
    sigma_noise: float = 1e-3
    kernel_length: float = 0.3
    dt: float = 2.5e-4
    t_final: float = 5.0
    seed: int = 11
    penalty_tau: float | None = None  # default 10/dx

    def __post_init__(self):
        if self.d >= self.s:
            raise ValueError("need d < s")
        if self.n < 5:
            raise ValueError("grid too small")


def kl_expansion(kernel_length: float, grid: np.ndarray, d: int):
    """Leading eigenpairs of the squared-exponential kernel on a grid.

    The continuous eigenproblem is discretized with trapezoid weights;
    eigenvectors are normalized in the weighted inner product and signed
    so their first non-negligible component is positive.  Returns
    (eigenvalues descending, modes n-by-d).
    """
    grid = np.asarray(grid, dtype=np.float64)
    n = len(grid)
    if d > n:
        raise ValueError("cannot extract more modes than grid points")
    h = grid[1] - grid[0]
    w = np.full(n, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    kern = np.exp(-((grid[:, None] - grid[None, :]) ** 2) / (2.0 * kernel_length**2))
    sq = np.sqrt(w)
    lam, vec = np.linalg.eigh(sq[:, None] * kern * sq[None, :])
    lam = lam[::-1][:d]
    vec = vec[:, ::-1][:, :d]
    psi = vec / sq[:, None]
    for j in range(d):
        lead = np.flatnonzero(np.abs(psi[:, j]) > 1e-12)
        if len(lead) and psi[lead[0], j] < 0:
            psi[:, j] = -psi[:, j]
    return lam, psi


def _kl_for_grid(kernel_length: float, grid: np.ndarray, d: int):
    n = len(grid)
    if n <= _KL_DIRECT_LIMIT:
        return kl_expansion(kernel_length, grid, d)
    coarse = np.linspace(grid[0], grid[-1], _KL_DIRECT_LIMIT)
    lam, psi_c = kl_expansion(kernel_length, coarse, d)
    psi = np.empty((n, d))
    for j in range(d):
        psi[:, j] = np.interp(grid, coarse, psi_c[:, j])
    # renormalize in the fine-grid weighted inner product
    h = grid[1] - grid[0]
    w = np.full(n, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    psi /= np.sqrt((w[:, None] * psi * psi).sum(axis=0))[None, :]
    return lam, psi


class BurgersModel(MdeModel):
    def __init__(self, spec: BurgersSpec):
        self.spec = spec
        n, s, d = spec.n, spec.s, spec.d
        self.n, self.s = n, s
        self.nu = spec.nu
        self.x = np.linspace(0.0, 1.0, n)
        self.dx = self.x[1] - self.x[0]
        self.tau = spec.penalty_tau if spec.penalty_tau is not None else 10.0 / self.dx
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1,)))
        self.xi = rng.normal(0.0, 1.0, size=(d, s))
        self.lam_x, self.psi = _kl_for_grid(spec.kernel_length, self.x, d)
        self._mode_index = np.arange(1, d + 1)
        self.adjacency = AdjacencyMap(neighbors=self._neighbors, max_width=2)

    # -- data ---------------------------------------------------------------

    def initial_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """V0 = L @ R.T with L carrying the profile and scaled modes."""
        envelope = np.sin(2.0 * np.pi * self.x)
        profile = envelope * 0.5 * (np.exp(np.cos(2.0 * np.pi * self.x)) - 1.5)
        modes = envelope[:, None] * (np.sqrt(self.lam_x)[None, :] * self.psi)
        left = np.concatenate([profile[:, None], self.spec.sigma_noise * modes], axis=1)
        right = np.concatenate([np.ones((1, self.s)), self.xi], axis=0)
        return left, right.T

    def initial_value(self) -> np.ndarray:
        left, right = self.initial_factors()
        return left @ right.T

    def boundary_value(self, t: float, cols: np.ndarray) -> np.ndarray:
        """Left-boundary target: deterministic wave plus random series."""
        lam_t = self._mode_index ** -2.0
        phi = np.sin(self._mode_index * np.pi * t)
        series = (lam_t * phi) @ self.xi[:, cols]
        return -np.sin(2.0 * np.pi * t) + self.spec.sigma_noise * series

    # -- right-hand side ----------------------------------------------------

    def _interior(self, vm, vc, vp):
        return -vc * (vp - vm) / (2.0 * self.dx) + self.nu * (vp - 2.0 * vc + vm) / self.dx**2

    def _left_row(self, t, v0, v1, v2, cols):
        dx = self.dx
        d1 = (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * dx)
        d2 = (v0 - 2.0 * v1 + v2) / dx**2
        return -v0 * d1 + self.nu * d2 + self.tau * (self.boundary_value(t, cols) - v0)

    def _right_row(self, vn, vm, vl):
        dx = self.dx
        d1 = (3.0 * vn - 4.0 * vm + vl) / (2.0 * dx)
        d2 = (vn - 2.0 * vm + vl) / dx**2
        return -vn * d1 + self.nu * d2 - self.tau * vn

    def rhs_full(self, t, v):
        cols = np.arange(v.shape[1])
        out = np.empty_like(v)
        out[1:-1] = self._interior(v[:-2], v[1:-1], v[2:])
        out[0] = self._left_row(t, v[0], v[1], v[2], cols)
        out[-1] = self._right_row(v[-1], v[-2], v[-3])
        return out

    def rhs_cols(self, t, v_cols, cols):
        out = np.empty_like(v_cols)
        out[1:-1] = self._interior(v_cols[:-2], v_cols[1:-1], v_cols[2:])
        out[0] = self._left_row(t, v_cols[0], v_cols[1], v_cols[2], np.asarray(cols))
        out[-1] = self._right_row(v_cols[-1], v_cols[-2], v_cols[-3])
        return out

    def rhs_rows(self, t, v_sub, rows, adjacent):
        rows = np.asarray(rows)
        cat = np.concatenate([rows, np.asarray(adjacent)])
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[cat] = np.arange(len(cat))
        out = np.empty((len(rows), v_sub.shape[1]))
        interior = (rows > 0) & (rows < self.n - 1)
        if interior.any():
            ri = rows[interior]
            out[interior] = self._interior(
                v_sub[pos[ri - 1]], v_sub[pos[ri]], v_sub[pos[ri + 1]]
            )
        for k in np.flatnonzero(~interior):
            if rows[k] == 0:
                out[k] = self._left_row(
                    t, v_sub[pos[0]], v_sub[pos[1]], v_sub[pos[2]],
                    np.arange(v_sub.shape[1]),
                )
            else:
                out[k] = self._right_row(
                    v_sub[pos[self.n - 1]], v_sub[pos[self.n - 2]], v_sub[pos[self.n - 3]]
                )
        return out

    def _neighbors(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        pieces = []
        interior = rows[(rows > 0) & (rows < self.n - 1)]
        pieces.append(interior - 1)
        pieces.append(interior + 1)
        if (rows == 0).any():
            pieces.append(np.array([1, 2], dtype=np.int64))
        if (rows == self.n - 1).any():
            pieces.append(np.array([self.n - 3, self.n - 2], dtype=np.int64))
        return np.unique(np.concatenate(pieces)) if pieces else rows[:0]


def burgers_model(spec: BurgersSpec) -> tuple[BurgersModel, tuple[np.ndarray, np.ndarray]]:
    model = BurgersModel(spec)
    return model, model.initial_factors()

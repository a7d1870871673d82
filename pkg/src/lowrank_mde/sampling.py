"""Row/column index selection from orthonormal bases, and stencil adjacency.

The selectors are greedy and deterministic: argmax ties resolve to the
lowest index, so identical inputs always produce identical indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DegenerateBasis, TooManySamples


@dataclass(frozen=True)
class IndexVector:
    """Distinct indices into a dimension of size ``bound``.

    Selector outputs are always non-empty; adjacency queries may
    legitimately come back empty (e.g. the selected set is already
    closed under the stencil).
    """

    indices: np.ndarray
    bound: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size and (idx.min() < 0 or idx.max() >= self.bound):
            raise ValueError(f"indices out of range for bound {self.bound}")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("indices must be distinct")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class AdjacencyMap:
    """Which rows a right-hand-side row evaluation depends on.

    ``neighbors`` maps an array of row indices to the union of their
    dependency rows (members of the query set may be included; callers
    subtract them).  ``max_width`` is the declared per-row stencil bound.
    ``full_coupling`` marks models whose every row depends on all rows;
    for those the closure of any set is the whole index range and the
    stepper falls back to dense row reconstruction.
    """

    neighbors: Callable[[np.ndarray], np.ndarray]
    max_width: int
    full_coupling: bool = False


def _greedy_argmax(values: np.ndarray) -> int:
    # np.argmax returns the first maximizer: lowest index wins on ties.
    return int(np.argmax(values))


def deim(u) -> IndexVector:
    """Greedy residual-argmax point selection from an orthonormal basis.

    Column j is interpolated on the previously selected rows; the next
    row is where the interpolation residual is largest in magnitude.
    The selected block u[p, :] is guaranteed invertible for orthonormal
    input.
    """
    u = np.asarray(u, dtype=np.float64)
    n, r = u.shape
    if r > n:
        raise ValueError(f"basis must be tall, got {u.shape}")
    p = [_greedy_argmax(np.abs(u[:, 0]))]
    if np.abs(u[p[0], 0]) == 0.0:
        raise DegenerateBasis("first basis column is identically zero")
    for j in range(1, r):
        c = np.linalg.solve(u[np.ix_(p, range(j))], u[p, j])
        rho = u[:, j] - u[:, :j] @ c
        k = _greedy_argmax(np.abs(rho))
        if np.abs(rho[k]) == 0.0:
            raise DegenerateBasis(f"zero residual at column {j}")
        p.append(k)
    return IndexVector(np.array(p, dtype=np.int64), bound=n)


def qdeim(u) -> IndexVector:
    """Point selection via column-pivoted QR of the transposed basis."""
    u = np.asarray(u, dtype=np.float64)
    n, r = u.shape
    if r > n:
        raise ValueError(f"basis must be tall, got {u.shape}")
    _, _, piv = scipy.linalg.qr(u.T, mode="economic", pivoting=True)
    return IndexVector(np.asarray(piv[:r], dtype=np.int64), bound=n)


def _bisect_secular(evals: np.ndarray, z2: np.ndarray, lo, hi, iters: int):
    """Bisect 1 + sum_j z2_j/(evals_j - mu) = 0 on (lo, hi), vectorized.

    The function is monotone increasing between the two smallest
    eigenvalues, so plain bisection is safe; intervals that contain no
    root collapse onto their lower end, which is the correct limit
    (the smallest eigenvalue is then unchanged by the update).
    """
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = 1.0 + (z2 / (evals[None, :] - mid[:, None])).sum(axis=1)
        below = f < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return lo, hi


def _best_lambda_min_after_append(
    evals: np.ndarray, z2: np.ndarray, excluded: np.ndarray
) -> int:
    """Row index maximizing the smallest eigenvalue of B + u u.T.

    ``evals`` are the ascending eigenvalues of B and ``z2`` the squared
    coordinates of every row in B's eigenbasis; rows flagged in
    ``excluded`` are not candidates.  The update can raise the smallest
    eigenvalue at most to the second one, and at most by the squared
    coordinate on the lowest eigenvector, which brackets every
    candidate's new eigenvalue analytically; most candidates are
    eliminated by those bounds alone, and bisection runs in short rounds
    on the shrinking set of contenders.  Boolean masking keeps original
    order, so exact ties still resolve to the lowest index.
    """
    if len(evals) == 1:
        val = evals[0] + z2[:, 0]
        val[excluded] = -np.inf
        return _greedy_argmax(val)
    # Analytic bracket: the root mu of the secular equation satisfies
    # z1/(mu - l1) = 1 + sum_{j>=2} z_j/(evals_j - mu), so mu <= l1 + z1,
    # and bounding the right side at the upper end gives the floor.
    z1 = z2[:, 0]
    hi = np.minimum(evals[1], evals[0] + z1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = (z2[:, 1:] / (evals[None, 1:] - hi[:, None])).sum(axis=1)
    tail = np.where(np.isfinite(tail), np.maximum(tail, 0.0), np.inf)
    lo = evals[0] + z1 / (1.0 + tail)
    lo[excluded] = -np.inf
    hi[excluded] = -np.inf
    idx = np.arange(z2.shape[0])
    for _ in range(10):
        keep = hi >= lo.max()
        if keep.sum() <= 1:
            break
        idx, z2, lo, hi = idx[keep], z2[keep], lo[keep], hi[keep]
        lo, hi = _bisect_secular(evals, z2, lo, hi, 6)
    return int(idx[_greedy_argmax(lo)])


def oversample(u, p0: IndexVector, m: int) -> IndexVector:
    """Extend a selected row set by m rows, greedily maximizing sigma_min.

    Each appended row is the one (lowest index on ties) that maximizes
    the smallest singular value of the augmented block u[p, :], which
    directly minimizes the norm of its pseudo-inverse.  Appending rows
    can never decrease sigma_min, so the error factor is non-increasing
    in m.
    """
    u = np.asarray(u, dtype=np.float64)
    n, r = u.shape
    if m < 0:
        raise ValueError("m must be non-negative")
    if len(p0) + m > n:
        raise TooManySamples(f"cannot select {len(p0) + m} rows out of {n}")
    if m == 0:
        return p0
    selected = np.zeros(n, dtype=bool)
    selected[p0.indices] = True
    p = list(p0.indices)
    block = u[p, :]
    gram = block.T @ block
    for _ in range(m):
        evals, vecs = np.linalg.eigh(gram)
        z2 = u @ vecs
        np.square(z2, out=z2)
        pick = _best_lambda_min_after_append(evals, z2, selected)
        p.append(pick)
        selected[pick] = True
        gram = gram + np.outer(u[pick, :], u[pick, :])
    return IndexVector(np.array(p, dtype=np.int64), bound=n)


def find_adjacent(p: IndexVector, adjacency: AdjacencyMap, stages: int = 1) -> IndexVector:
    """Rows additionally required to evaluate the right-hand side at p.

    Applies the adjacency map ``stages`` times (closure levels) and
    returns the union minus p itself, sorted.  ``stages = 0`` returns an
    empty set.  For fully-coupled models the closure is everything.
    """
    if stages < 0:
        raise ValueError("stages must be non-negative")
    n = p.bound
    if stages == 0:
        return IndexVector(np.empty(0, dtype=np.int64), bound=n)
    if adjacency.full_coupling:
        mask = np.ones(n, dtype=bool)
        mask[p.indices] = False
        return IndexVector(np.flatnonzero(mask).astype(np.int64), bound=n)
    closure = np.asarray(p.indices, dtype=np.int64)
    for _ in range(stages):
        nbrs = np.asarray(adjacency.neighbors(closure), dtype=np.int64)
        closure = np.union1d(closure, nbrs)
    extra = np.setdiff1d(closure, p.indices, assume_unique=False)
    return IndexVector(extra.astype(np.int64), bound=n)

"""Low-rank state representation and the sampled CUR reconstruction kernel.

A state is the factorization U diag(sigma) Y.T of an n-by-s matrix at
one time instant.  The reconstruction kernel rebuilds such a state from
sampled rows and columns of an (otherwise never materialized) update
matrix G, and reports the conditioning diagnostics that bound the
oblique-projection error.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from . import kernels
from .errors import InvalidTruncation, SingularCore, ZeroState
from .sampling import IndexVector

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class LowRankState:
    """Immutable factorization U diag(sigma) Y.T at time t.

    U (n-by-r) and Y (s-by-r) have orthonormal columns; sigma is
    descending and non-negative.  Zero trailing singular values are
    legal: overapproximated states carry them deliberately.
    """

    u: np.ndarray
    sigma: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        sigma = np.ascontiguousarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sigma", sigma)
        n, r = u.shape
        s, ry = y.shape
        if sigma.shape != (r,) or ry != r:
            raise ValueError("factor shapes are inconsistent")
        if not 1 <= r <= min(n, s):
            raise ValueError(f"rank {r} invalid for {n}x{s}")
        if (np.diff(sigma) > 0).any() or (sigma < 0).any():
            raise ValueError("sigma must be descending and non-negative")
        for name, q in (("u", u), ("y", y)):
            drift = np.linalg.norm(q.T @ q - np.eye(r))
            if drift > _ORTHO_TOL:
                raise ValueError(f"{name} columns not orthonormal (drift {drift:.2e})")

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def s(self) -> int:
        return self.y.shape[0]

    @property
    def rank(self) -> int:
        return len(self.sigma)

    def dense(self) -> np.ndarray:
        """Materialize the full n-by-s matrix (tests and small cases only)."""
        return (self.u * self.sigma) @ self.y.T


@dataclass(frozen=True)
class CurDiagnostics:
    """Conditioning record of one sampled reconstruction.

    eta_p bounds the row-interpolation amplification, eta_s the column
    one; their combination is the multiplicative factor between the
    sampled reconstruction error and the best orthogonal-projection
    error.  sigma_trailing is the smallest retained singular value.
    """

    eta_p: float
    eta_s: float | None
    sigma_trailing: float
    rank_deficient: bool = False

    @property
    def error_factor(self) -> float:
        if self.eta_s is None:
            return float("nan")
        return min(self.eta_p * (1.0 + self.eta_s), self.eta_s * (1.0 + self.eta_p))


def assemble_rows(state: LowRankState, rows: IndexVector | np.ndarray) -> np.ndarray:
    """Rows of the represented matrix, without forming the full product."""
    idx = rows.indices if isinstance(rows, IndexVector) else np.asarray(rows)
    return (state.u[idx, :] * state.sigma) @ state.y.T


def assemble_cols(state: LowRankState, cols: IndexVector | np.ndarray) -> np.ndarray:
    """Columns of the represented matrix, without forming the full product."""
    idx = cols.indices if isinstance(cols, IndexVector) else np.asarray(cols)
    return (state.u * state.sigma) @ state.y[idx, :].T


def truncate(state: LowRankState, r_new: int) -> LowRankState:
    """Drop trailing modes, keeping the leading r_new."""
    if not 1 <= r_new < state.rank:
        raise InvalidTruncation(f"cannot truncate rank {state.rank} to {r_new}")
    return LowRankState(
        u=state.u[:, :r_new],
        sigma=state.sigma[:r_new],
        y=state.y[:, :r_new],
        t=state.t,
    )


def error_proxy(sigma) -> float:
    """Trailing singular value over the Frobenius norm of all retained ones.

    Drives rank adaptation: large values mean the truncation is about to
    lose resolved content, tiny values mean the trailing mode is noise.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.size == 0:
        raise ZeroState("empty sigma")
    nrm = np.linalg.norm(sigma)
    if nrm == 0.0:
        raise ZeroState("all singular values are zero")
    return float(sigma[-1] / nrm)


def cur_from_samples(
    g_cols: np.ndarray,
    g_rows: np.ndarray,
    p: IndexVector,
    t: float,
    cols: IndexVector | None = None,
) -> tuple[LowRankState, CurDiagnostics]:
    """Rebuild a low-rank state from sampled columns and rows of G.

    g_cols holds G at the selected columns (n-by-r); g_rows holds G at
    the selected rows p (len(p)-by-s, len(p) >= r).  The state is the
    SVD of the row samples fitted onto the orthonormal range of the
    column samples; the represented matrix matches G exactly on the
    sampled columns, and on the sampled rows as well when len(p) == r.

    When ``cols`` is given, eta_s is measured on the freshly computed
    parametric basis at those columns, which is the basis entering the
    projection error bound.
    """
    g_cols = np.asarray(g_cols, dtype=np.float64)
    g_rows = np.asarray(g_rows, dtype=np.float64)
    if g_rows.shape[0] != len(p):
        raise ValueError("g_rows row count must match len(p)")
    q, _, deficient = kernels.qr_economy(g_cols)
    q_p = q[p.indices, :]
    z = kernels.lstsq(q_p, g_rows)
    u_z, sigma, y = kernels.svd_economy(z)
    state = LowRankState(u=q @ u_z, sigma=sigma, y=y, t=t)
    eta_p = kernels.norm2_of_pinv(q_p)
    eta_s = None
    if cols is not None:
        eta_s = kernels.norm2_of_pinv(y[cols.indices, :])
    diag = CurDiagnostics(
        eta_p=eta_p,
        eta_s=eta_s,
        sigma_trailing=float(sigma[-1]),
        rank_deficient=deficient,
    )
    return state, diag


def cur_reference(g: np.ndarray, p: IndexVector, s: IndexVector) -> np.ndarray:
    """Explicit interpolatory CUR product (GS)(P.T G S)^-1 (P.T G).

    Test oracle for the sampled reconstruction; requires the dense G and
    square index sets, so it never appears on a production path.
    """
    g = np.asarray(g, dtype=np.float64)
    core = g[np.ix_(p.indices, s.indices)]
    sv = np.linalg.svd(core, compute_uv=False)
    if sv[-1] < 1e-14 * max(sv[0], 1.0):
        raise SingularCore("sampled core block is singular")
    return g[:, s.indices] @ np.linalg.solve(core, g[p.indices, :])


def projection_error_bound(
    g: np.ndarray, state: LowRankState, diag: CurDiagnostics
) -> tuple[float, float]:
    """Both sides of the sampled-projection error bound, in spectral norm.

    Returns (actual error, error_factor times the larger of the two
    one-sided orthogonal projection errors).  Test oracle: needs dense G.
    """
    g = np.asarray(g, dtype=np.float64)
    lhs = np.linalg.norm(g - state.dense(), 2)
    left = np.linalg.norm(g - state.u @ (state.u.T @ g), 2)
    right = np.linalg.norm(g - (g @ state.y) @ state.y.T, 2)
    rhs = diag.error_factor * max(left, right)
    return float(lhs), float(rhs)


_HEADER = struct.Struct("<qqqd")


def write_checkpoint(state: LowRankState, fh: BinaryIO) -> None:
    """Binary state dump: int64 n, s, r and float64 t, then U, sigma, Y row-major."""
    fh.write(_HEADER.pack(state.n, state.s, state.rank, state.t))
    fh.write(np.ascontiguousarray(state.u, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(state.sigma, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(state.y, dtype="<f8").tobytes())


def read_checkpoint(fh: BinaryIO) -> LowRankState:
    n, s, r, t = _HEADER.unpack(fh.read(_HEADER.size))
    u = np.frombuffer(fh.read(8 * n * r), dtype="<f8").reshape(n, r)
    sigma = np.frombuffer(fh.read(8 * r), dtype="<f8")
    y = np.frombuffer(fh.read(8 * s * r), dtype="<f8").reshape(s, r)
    return LowRankState(u=u.copy(), sigma=sigma.copy(), y=y.copy(), t=t)

"""Dense linear-algebra kernels used by every other module.

This is the one place a numerical backend is chosen (NumPy/LAPACK plus
a few SciPy routines).  All factorizations are economy-size; full
factorizations of n-by-s matrices are never materialized here.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import IllConditionedSamples

#: Relative diagonal threshold below which a QR factor is flagged rank deficient.
RANK_DEFICIENT_TOL = 1e-14

#: Absolute smallest-singular-value floor for invertibility of sampled blocks.
SINGULAR_TOL = 1e-14


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


class QrResult(NamedTuple):
    q: np.ndarray
    r: np.ndarray
    rank_deficient: bool


def qr_economy(a) -> QrResult:
    """Thin QR of an n-by-k matrix (n >= k).

    Rank deficiency is flagged, not fatal: a tiny diagonal entry of R
    means the input columns were linearly dependent, but Q is still a
    full set of orthonormal columns and downstream reconstruction must
    survive that (overapproximated states carry exactly-zero modes).
    """
    a = _as_matrix(a)
    q, r = np.linalg.qr(a, mode="reduced")
    scale = np.linalg.norm(a)
    diag = np.abs(np.diag(r))
    deficient = bool((diag < RANK_DEFICIENT_TOL * scale).any()) if scale > 0 else True
    return QrResult(q, r, deficient)


def svd_economy(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD returning (U, sigma, Y) with A = U @ diag(sigma) @ Y.T."""
    a = _as_matrix(a)
    u, sigma, yt = np.linalg.svd(a, full_matrices=False)
    return u, sigma, yt.T


def lstsq(a, b) -> np.ndarray:
    """Least-squares solution X of A @ X ~ B for a tall full-rank A.

    Solved through the thin QR of A, which gives the same minimizer as
    the normal equations (A.T A)^-1 A.T B without squaring the condition
    number.  For square A this reduces to an exact solve.
    """
    a = _as_matrix(a)
    b = _as_matrix(b)
    q, r = a.shape
    if q < r:
        raise ValueError(f"lstsq needs q >= r, got {a.shape}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] < SINGULAR_TOL * max(sv[0], 1.0):
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        raise IllConditionedSamples(cond, "least-squares system")
    qf, rf = np.linalg.qr(a, mode="reduced")
    return scipy.linalg.solve_triangular(rf, qf.T @ b)


def matrix_exponential(a) -> np.ndarray:
    """Matrix exponential of a small square matrix (scaling and squaring)."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exponential needs a square matrix")
    return scipy.linalg.expm(a)


def norm2_of_pinv(a) -> float:
    """Spectral norm of the left pseudo-inverse of a tall matrix: 1/sigma_min."""
    a = _as_matrix(a)
    if a.shape[0] < a.shape[1]:
        raise ValueError(f"norm2_of_pinv needs q >= r, got {a.shape}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] < SINGULAR_TOL:
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        raise IllConditionedSamples(cond, "pseudo-inverse norm")
    return float(1.0 / sv[-1])

"""Time-stepping engines.

Four ways to advance the matrix differential equation dV/dt = F(t, V):

* ``tdb_cur_step`` -- the rank-adaptive sampled reconstruction stepper,
  which touches only selected rows and columns of the update matrix;
* ``dlra_step`` / ``do_step`` -- the time-continuous factor-evolution
  baselines, which need the dense right-hand side and invert small
  coupling matrices (their documented weakness);
* ``fom_solve`` -- the dense reference integration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BaselineSingular, ModelBlowup, ZeroReference
from .lowrank import (
    CurDiagnostics,
    LowRankState,
    assemble_cols,
    cur_from_samples,
    error_proxy,
    truncate,
)
from .sampling import AdjacencyMap, IndexVector, deim, find_adjacent, oversample, qdeim
from .schemes import SchemeSpec

_COND_LIMIT = 1e14

_SELECTORS = {"deim": deim, "qdeim": qdeim}


class MdeModel:
    """Contract for a discretized matrix differential equation.

    Column j of the right-hand side may depend only on column j of V
    (independent samples); rows couple through the declared adjacency.
    ``rhs_rows`` receives values stacked [rows, adjacent] and returns the
    right-hand side at ``rows`` only.  ``rhs_full`` exists where the dense
    reference solve is affordable.
    """

    n: int
    s: int
    adjacency: AdjacencyMap

    def rhs_cols(self, t: float, v_cols: np.ndarray, cols: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rhs_rows(
        self, t: float, v_sub: np.ndarray, rows: np.ndarray, adjacent: np.ndarray
    ) -> np.ndarray:
        raise NotImplementedError

    def rhs_full(self, t: float, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class RankPolicy:
    """Rank bounds, adaptation thresholds, and row oversampling count."""

    r0: int
    r_min: int = 1
    r_max: int = 2**31
    eps_l: float = 0.0
    eps_u: float = 1.0
    m: int = 0
    adapt: bool = False

    def __post_init__(self):
        if not 0 < self.r_min <= self.r0 <= self.r_max:
            raise ValueError("need 0 < r_min <= r0 <= r_max")
        if self.eps_l >= self.eps_u:
            raise ValueError("need eps_l < eps_u")
        if self.m < 0:
            raise ValueError("m must be non-negative")


@dataclass
class StepDiagnostics:
    t: float
    rank: int
    sigma: np.ndarray
    epsilon: float
    rank_action: str  # none | added | removed
    eta_p: float
    eta_s: float | None
    rank_deficient: bool
    wall: dict[str, float] = field(default_factory=dict)

    @property
    def wall_total(self) -> float:
        return sum(self.wall.values())


def _check_finite(arr: np.ndarray, t: float, where: str) -> None:
    if not np.isfinite(arr).all():
        raise ModelBlowup(t, where)


def _decide_rank(state: LowRankState, policy: RankPolicy) -> tuple[LowRankState, int, str, float]:
    eps = error_proxy(state.sigma)
    r = state.rank
    if policy.adapt and eps > policy.eps_u and r < policy.r_max:
        return state, r + 1, "added", eps
    if policy.adapt and eps < policy.eps_l and r > policy.r_min:
        return truncate(state, r - 1), r - 1, "removed", eps
    return state, r, "none", eps


def _select(values: np.ndarray, selector, count: int) -> IndexVector:
    base = selector(values)
    if count > len(base):
        return oversample(values, base, count - len(base))
    return base


def tdb_cur_step(
    state: LowRankState,
    model: MdeModel,
    dt: float,
    scheme: SchemeSpec,
    policy: RankPolicy,
    selector: str = "deim",
) -> tuple[LowRankState, StepDiagnostics]:
    """One step of the rank-adaptive sampled-reconstruction integrator.

    The update matrix G (the scheme applied to the current state) is
    evaluated only at selected columns and rows.  Column samples get the
    scheme applied column-wise as a black box; row samples are built
    stage by stage, reconstructing each stage's values at the adjacent
    rows from that stage's own sampled low-rank surrogate.  The new
    state is the SVD of the row samples fitted onto the range of the
    column samples.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    pick = _SELECTORS[selector]
    t0 = state.t
    stopwatch: dict[str, float] = {}

    tic = time.perf_counter()
    working, r_new, action, eps = _decide_rank(state, policy)
    cols = _select(working.y, pick, r_new)
    rows = _select(working.u, pick, r_new + policy.m)
    adjacent = find_adjacent(rows, model.adjacency, stages=1)
    stopwatch["selection"] = time.perf_counter() - tic

    a, b, c = scheme.a, scheme.b, scheme.c
    if model.adjacency.full_coupling:
        g_cols, g_rows = _sweep_dense(working, model, dt, a, b, c, cols, rows, stopwatch)
    else:
        g_cols, g_rows = _sweep_sampled(
            working, model, dt, a, b, c, cols, rows, adjacent, stopwatch
        )
    _check_finite(g_cols, t0, "sampled columns of the update")
    _check_finite(g_rows, t0, "sampled rows of the update")

    tic = time.perf_counter()
    new_state, cur_diag = cur_from_samples(g_cols, g_rows, rows, t0 + dt, cols=cols)
    stopwatch["factorize"] = time.perf_counter() - tic

    diag = StepDiagnostics(
        t=t0 + dt,
        rank=new_state.rank,
        sigma=new_state.sigma.copy(),
        epsilon=eps,
        rank_action=action,
        eta_p=cur_diag.eta_p,
        eta_s=cur_diag.eta_s,
        rank_deficient=cur_diag.rank_deficient,
        wall=stopwatch,
    )
    return new_state, diag


def _sweep_dense(state, model, dt, a, b, c, cols, rows, stopwatch):
    """Stage sweep for fully-coupled models: every stage is evaluated at
    all rows (the adjacency closure is the whole index range), so no
    surrogate is needed and the sampled update is sliced at the end."""
    t0 = state.t
    n = state.n
    all_rows = np.arange(n)
    none = np.empty(0, dtype=np.int64)
    tic = time.perf_counter()
    v = state.dense()
    stage_f: list[np.ndarray] = []
    for i in range(len(b)):
        x = v
        for j in range(i):
            if a[i, j] != 0.0:
                x = x + (dt * a[i, j]) * stage_f[j]
        stage_f.append(model.rhs_rows(t0 + c[i] * dt, x, all_rows, none))
    g = v.copy()
    for bi, fi in zip(b, stage_f):
        if bi != 0.0:
            g += (dt * bi) * fi
    stopwatch["rows"] = time.perf_counter() - tic
    stopwatch["columns"] = 0.0
    return g[:, cols.indices], g[rows.indices, :]


def _sweep_sampled(state, model, dt, a, b, c, cols, rows, adjacent, stopwatch):
    """Stage sweep for sparse-adjacency models.

    Columns: the scheme runs column-wise on the selected columns only.
    Rows: each stage needs prior-stage values at the adjacent rows too;
    those are reconstructed from the stage's sampled surrogate (QR of
    the stage's column samples, least-squares fit of its row samples).
    """
    t0 = state.t
    p = rows.indices
    cat = np.concatenate([p, adjacent.indices])
    n_p = len(p)
    last_needed = _last_dependency(a, b)

    tic = time.perf_counter()
    v_cols = assemble_cols(state, cols)
    v_rows = (state.u[cat, :] * state.sigma) @ state.y.T
    stopwatch["reconstruct"] = time.perf_counter() - tic

    col_f: list[np.ndarray] = []
    row_f: list[np.ndarray] = []
    row_full: list[np.ndarray | None] = []
    t_cols = 0.0
    t_rows = 0.0
    for i in range(len(b)):
        xc = v_cols
        xr = v_rows
        for j in range(i):
            if a[i, j] != 0.0:
                xc = xc + (dt * a[i, j]) * col_f[j]
                xr = xr + (dt * a[i, j]) * row_full[j]
        ti = t0 + c[i] * dt
        tic = time.perf_counter()
        col_f.append(model.rhs_cols(ti, xc, cols.indices))
        t_cols += time.perf_counter() - tic
        tic = time.perf_counter()
        row_f.append(model.rhs_rows(ti, xr, p, adjacent.indices))
        if i < last_needed:
            full = np.empty((len(cat), state.s))
            full[:n_p] = row_f[i]
            full[n_p:] = _stage_surrogate_rows(
                col_f[i], row_f[i], p, adjacent.indices
            )
            row_full.append(full)
        else:
            row_full.append(None)
        t_rows += time.perf_counter() - tic
    stopwatch["columns"] = t_cols
    stopwatch["rows"] = t_rows

    g_cols = v_cols.copy()
    g_rows = v_rows[:n_p].copy()
    for bi, fc, fr in zip(b, col_f, row_f):
        if bi != 0.0:
            g_cols += (dt * bi) * fc
            g_rows += (dt * bi) * fr
    return g_cols, g_rows


def _stage_surrogate_rows(stage_cols, stage_rows, p, adjacent):
    """Stage values at the adjacent rows, from the stage's own samples.

    The fitted values of a least-squares fit within the column space of
    the sampled stage columns do not depend on the basis chosen for that
    space, so the sampled columns are used directly (normalized for
    scale) instead of orthonormalizing them; an orthonormal basis is
    computed only if the raw columns are too close to dependent.
    """
    scale = np.sqrt((stage_cols * stage_cols).sum(axis=0))
    scale[scale == 0.0] = 1.0
    basis_p = stage_cols[p, :] / scale
    sv = np.linalg.svd(basis_p, compute_uv=False)
    if sv[-1] < 1e-8 * max(sv[0], 1.0):
        q, _, _ = kernels.qr_economy(stage_cols)
        return q[adjacent, :] @ kernels.lstsq(q[p, :], stage_rows)
    coef = kernels.lstsq(basis_p, stage_rows)
    return (stage_cols[adjacent, :] / scale) @ coef


def _last_dependency(a: np.ndarray, b: np.ndarray) -> int:
    """Index past the last stage whose values later stages still consume."""
    last = 0
    for i in range(len(b)):
        for j in range(i):
            if a[i, j] != 0.0:
                last = max(last, j + 1)
    return last


# ---------------------------------------------------------------------------
# Baselines


def _guarded_inverse(mat: np.ndarray, what: str) -> np.ndarray:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > _COND_LIMIT:
        cond = np.inf if sv[-1] == 0.0 else sv[0] / sv[-1]
        raise BaselineSingular(cond, what)
    return np.linalg.inv(mat)


def dlra_step(
    u: np.ndarray,
    sigma_full: np.ndarray,
    y: np.ndarray,
    model: MdeModel,
    t: float,
    dt: float,
    scheme: SchemeSpec,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One step of the coupled factor evolution with a full core matrix.

    The three factors advance together under the chosen explicit scheme;
    the core inverse is what fails when trailing singular values shrink.
    The factors are re-orthonormalized after the step, with the rotation
    absorbed into the core, so the baseline fails for its documented
    reason and not from slow orthogonality drift.
    """

    def rates(uu, ss, yy, ti):
        s_inv = _guarded_inverse(ss, "core matrix")
        v = (uu @ ss) @ yy.T
        f = model.rhs_full(ti, v)
        _check_finite(f, ti, "dense right-hand side")
        fy = f @ yy
        ftu = f.T @ uu
        s_dot = uu.T @ fy
        u_dot = (fy - uu @ (uu.T @ fy)) @ s_inv
        y_dot = (ftu - yy @ (yy.T @ ftu)) @ s_inv.T
        return u_dot, s_dot, y_dot

    u, sigma_full, y = _explicit_sweep_triplet(
        (u, sigma_full, y), rates, t, dt, scheme
    )
    u, ru = np.linalg.qr(u)
    y, ry = np.linalg.qr(y)
    sigma_full = ru @ sigma_full @ ry.T
    _check_finite(sigma_full, t + dt, "core matrix")
    return u, sigma_full, y


def do_step(
    u_do: np.ndarray,
    y_do: np.ndarray,
    model: MdeModel,
    t: float,
    dt: float,
    scheme: SchemeSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """One step of the two-factor evolution with correlation matrix Y.T Y."""

    def rates(uu, yy, ti):
        corr = yy.T @ yy
        c_inv = _guarded_inverse(corr, "correlation matrix")
        v = uu @ yy.T
        f = model.rhs_full(ti, v)
        _check_finite(f, ti, "dense right-hand side")
        fy = f @ yy
        u_dot = (fy - uu @ (uu.T @ fy)) @ c_inv
        y_dot = f.T @ uu
        return u_dot, y_dot

    u_do, y_do = _explicit_sweep_triplet((u_do, y_do), rates, t, dt, scheme)
    u_do, ru = np.linalg.qr(u_do)
    y_do = y_do @ ru.T
    _check_finite(y_do, t + dt, "coefficient factor")
    return u_do, y_do


def _explicit_sweep_triplet(factors, rates, t, dt, scheme):
    """Apply one explicit RK step to a tuple-valued ODE."""
    a, b, c = scheme.a, scheme.b, scheme.c
    stage_rates: list[tuple[np.ndarray, ...]] = []
    for i in range(len(b)):
        stage = list(factors)
        for j in range(i):
            if a[i, j] != 0.0:
                for k in range(len(stage)):
                    stage[k] = stage[k] + (dt * a[i, j]) * stage_rates[j][k]
        stage_rates.append(rates(*stage, t + c[i] * dt))
    out = list(factors)
    for i, bi in enumerate(b):
        if bi != 0.0:
            for k in range(len(out)):
                out[k] = out[k] + (dt * bi) * stage_rates[i][k]
    return tuple(out)


# ---------------------------------------------------------------------------
# Dense reference


@dataclass
class FomTrajectory:
    """Dense reference solution with snapshots at requested times."""

    times: list[float]
    snapshots: dict[float, np.ndarray]
    final: np.ndarray
    t_final: float

    def at(self, t: float) -> np.ndarray:
        for tk, v in self.snapshots.items():
            if abs(tk - t) <= 1e-9 * max(1.0, abs(t)):
                return v
        raise KeyError(f"no snapshot recorded at t = {t}")


def fom_solve(
    model: MdeModel,
    v0: np.ndarray,
    dt: float,
    scheme: SchemeSpec,
    t_final: float,
    snapshot_times=(),
) -> FomTrajectory:
    """Explicit dense integration of the full system (desk scale only)."""
    if dt <= 0 or t_final <= 0:
        raise ValueError("dt and t_final must be positive")
    v = np.array(v0, dtype=np.float64)
    a, b, c = scheme.a, scheme.b, scheme.c
    wanted = sorted(float(ts) for ts in snapshot_times)
    snapshots: dict[float, np.ndarray] = {}
    t = 0.0
    while wanted and wanted[0] <= 0.0:
        snapshots[wanted.pop(0)] = v.copy()
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * t_final:
        raise ValueError("t_final must be an integer number of steps")
    for _ in range(steps):
        stage_f: list[np.ndarray] = []
        for i in range(len(b)):
            x = v
            for j in range(i):
                if a[i, j] != 0.0:
                    x = x + (dt * a[i, j]) * stage_f[j]
            stage_f.append(model.rhs_full(t + c[i] * dt, x))
        for bi, fi in zip(b, stage_f):
            if bi != 0.0:
                v = v + (dt * bi) * fi
        t += dt
        _check_finite(v, t, "dense solution")
        while wanted and t >= wanted[0] - 0.5 * dt:
            snapshots[wanted.pop(0)] = v.copy()
    return FomTrajectory(
        times=sorted(snapshots), snapshots=snapshots, final=v, t_final=t
    )


def relative_error(approx: LowRankState, reference: np.ndarray) -> float:
    """Relative Frobenius distance, assembled block-wise.

    The difference is formed in column blocks so the error of a nearly
    exact approximation is not lost to cancellation against the large
    norms of the full matrices.
    """
    reference = np.asarray(reference, dtype=np.float64)
    if reference.shape != (approx.n, approx.s):
        raise ValueError("shape mismatch between approximation and reference")
    ref_norm_sq = 0.0
    diff_norm_sq = 0.0
    width = max(approx.rank, 64)
    scaled = approx.u * approx.sigma
    for start in range(0, approx.s, width):
        block = slice(start, min(start + width, approx.s))
        delta = scaled @ approx.y[block, :].T - reference[:, block]
        diff_norm_sq += float((delta * delta).sum())
        ref_norm_sq += float((reference[:, block] * reference[:, block]).sum())
    if ref_norm_sq == 0.0:
        raise ZeroReference("reference matrix has zero norm")
    return float(np.sqrt(diff_norm_sq / ref_norm_sq))


_EXACT_RANK_TOL = 1e-12


def initial_state(v0, r0: int, t: float = 0.0, pad_to_rank: bool = False) -> LowRankState:
    """Best rank-r0 factorization of an initial matrix.

    ``v0`` is either a dense array or a factored pair (L, R) with
    V0 = L @ R.T (random expansions arrive factored).  If the numerical
    rank of V0 is below r0 the returned rank is the numerical rank and
    the adaptive policy is expected to grow it -- unless ``pad_to_rank``
    is set, which keeps r0 modes including exactly-zero trailing ones
    (deliberate overapproximation).
    """
    if isinstance(v0, tuple):
        left, right = v0
        ql, rl = np.linalg.qr(np.asarray(left, dtype=np.float64), mode="reduced")
        qr_, rr = np.linalg.qr(np.asarray(right, dtype=np.float64), mode="reduced")
        uc, sigma, yc = kernels.svd_economy(rl @ rr.T)
        u_full, y_full = ql @ uc, qr_ @ yc
    else:
        u_full, sigma, y_full = kernels.svd_economy(np.asarray(v0, dtype=np.float64))
    if r0 > len(sigma):
        raise ValueError(f"r0 = {r0} exceeds min(n, s) = {len(sigma)}")
    r = r0
    if not pad_to_rank:
        numerical = int((sigma > _EXACT_RANK_TOL * sigma[0]).sum()) if sigma[0] > 0 else 1
        r = min(r0, max(numerical, 1))
    return LowRankState(u=u_full[:, :r], sigma=sigma[:r], y=y_full[:, :r], t=t)

import numpy as np
import pytest

from lowrank_mde import (
    AdjacencyMap,
    MdeModel,
    RankPolicy,
    SchemeSpec,
    dlra_step,
    do_step,
    fom_solve,
    initial_state,
    relative_error,
    scheme,
    tdb_cur_step,
)
from lowrank_mde.errors import BaselineSingular, ModelBlowup, ZeroReference
from lowrank_mde.models import AdrSpec, BurgersSpec, ToySpec, adr_model, burgers_model, toy_model


class ZeroModel(MdeModel):
    """dV/dt = 0 on a dense-coupled toy-sized system."""

    def __init__(self, n, s):
        self.n, self.s = n, s
        self.adjacency = AdjacencyMap(
            neighbors=lambda rows: np.arange(n), max_width=n, full_coupling=True
        )

    def rhs_full(self, t, v):
        return np.zeros_like(v)

    def rhs_cols(self, t, v_cols, cols):
        return np.zeros_like(v_cols)

    def rhs_rows(self, t, v_sub, rows, adjacent):
        return np.zeros((len(rows), v_sub.shape[1]))


class BlowupModel(ZeroModel):
    def rhs_full(self, t, v):
        out = np.full_like(v, np.inf)
        return out

    def rhs_rows(self, t, v_sub, rows, adjacent):
        return np.full((len(rows), v_sub.shape[1]), np.inf)


def test_scheme_registry_and_validation():
    for kind, stages in (("euler", 1), ("rk2_midpoint", 2), ("rk4_classic", 4)):
        assert scheme(kind).stages == stages
    with pytest.raises(ValueError):
        scheme("bogus")
    with pytest.raises(ValueError):
        SchemeSpec(kind="implicit", a=[[1.0]], b=[1.0], c=[0.0])


def test_rank_policy_validation():
    with pytest.raises(ValueError):
        RankPolicy(r0=3, r_min=4)
    with pytest.raises(ValueError):
        RankPolicy(r0=3, eps_l=0.5, eps_u=0.5)
    with pytest.raises(ValueError):
        RankPolicy(r0=3, m=-1)


@pytest.mark.parametrize("kind", ["euler", "rk2_midpoint", "rk4_classic"])
def test_full_rank_step_equals_dense_step_toy(kind):
    model, _ = toy_model(ToySpec(n=16, seed=3))
    sch = scheme(kind)
    state = initial_state(model.initial_value(), 16)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, RankPolicy(r0=16, r_max=16))
    ref = fom_solve(model, model.initial_value(), 1e-3, sch, 1e-3)
    assert relative_error(new, ref.final) <= 1e-10


def test_full_rank_step_equals_dense_step_burgers():
    # generic full-rank start: the equivalence needs nonsingular sampled blocks
    model, _ = burgers_model(BurgersSpec(n=30, s=12, d=5))
    sch = scheme("rk4_classic")
    dense0 = 0.1 * np.random.default_rng(17).normal(size=(30, 12))
    state = initial_state(dense0, 12)
    new, _ = tdb_cur_step(state, model, 1e-4, sch, RankPolicy(r0=12, r_max=12))
    ref = fom_solve(model, dense0, 1e-4, sch, 1e-4)
    assert relative_error(new, ref.final) <= 1e-10


def test_full_rank_step_equals_dense_step_adr():
    model, _ = adr_model(AdrSpec(nx=6, ny=5, s=10))
    sch = scheme("rk4_classic")
    dense0 = np.random.default_rng(18).normal(size=(30, 10))
    dense0[model.dirichlet] = 0.0  # states live on the pinned-boundary structure
    state = initial_state(dense0, 10)
    new, _ = tdb_cur_step(state, model, 1e-4, sch, RankPolicy(r0=10, r_max=10))
    ref = fom_solve(model, dense0, 1e-4, sch, 1e-4)
    assert relative_error(new, ref.final) <= 1e-10


def run_tdb(model, state, dt, steps, policy, sch=None, selector="deim"):
    sch = sch or scheme("rk4_classic")
    diags = []
    for _ in range(steps):
        state, diag = tdb_cur_step(state, model, dt, sch, policy, selector)
        diags.append(diag)
    return state, diags


def test_state_invariants_after_steps():
    model, _ = toy_model(ToySpec(n=40, seed=5))
    state = initial_state(model.initial_value(), 8)
    state, diags = run_tdb(model, state, 1e-2, 20, RankPolicy(r0=8, r_max=8))
    assert np.linalg.norm(state.u.T @ state.u - np.eye(8)) <= 1e-10
    assert np.linalg.norm(state.y.T @ state.y - np.eye(8)) <= 1e-10
    assert (np.diff(state.sigma) <= 0).all()
    for diag in diags:
        assert np.isfinite(diag.eta_p)
        assert diag.eta_s is None or np.isfinite(diag.eta_s)


def test_temporal_order_matches_scheme():
    model, exact = toy_model(ToySpec(n=60, seed=1))
    ref = exact(0.5)
    errs = []
    dts = [0.05, 0.025, 0.0125]
    for dt in dts:
        state = initial_state(model.initial_value(), 24)
        state, _ = run_tdb(model, state, dt, int(round(0.5 / dt)), RankPolicy(r0=24, r_max=24))
        errs.append(relative_error(state, ref))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope >= 3.5


def test_determinism_bit_for_bit():
    model, _ = toy_model(ToySpec(n=30, seed=9))
    pol = RankPolicy(r0=6, r_max=12, eps_u=1e-6, m=2, adapt=True)
    a, _ = run_tdb(model, initial_state(model.initial_value(), 6), 1e-2, 15, pol)
    b, _ = run_tdb(model, initial_state(model.initial_value(), 6), 1e-2, 15, pol)
    assert np.array_equal(a.u, b.u)
    assert np.array_equal(a.sigma, b.sigma)
    assert np.array_equal(a.y, b.y)


def test_rank_policy_add_remove_hold():
    model, _ = toy_model(ToySpec(n=30, seed=4))
    sch = scheme("rk4_classic")
    state = initial_state(model.initial_value(), 6)
    eps = state.sigma[-1] / np.linalg.norm(state.sigma)

    grow = RankPolicy(r0=6, r_max=10, eps_l=eps * 1e-4, eps_u=eps / 2, m=0, adapt=True)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, grow)
    assert diag.rank_action == "added"
    assert new.rank == 7

    shrink = RankPolicy(r0=6, r_min=2, r_max=10, eps_l=eps * 2, eps_u=1.1, m=0, adapt=True)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, shrink)
    assert diag.rank_action == "removed"
    assert new.rank == 5

    hold = RankPolicy(r0=6, r_max=10, eps_l=eps / 2, eps_u=eps * 2, m=0, adapt=True)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, hold)
    assert diag.rank_action == "none"
    assert new.rank == 6

    capped = RankPolicy(r0=6, r_max=6, eps_l=eps * 1e-4, eps_u=eps / 2, m=0, adapt=True)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, capped)
    assert diag.rank_action == "none"
    assert new.rank == 6

    floored = RankPolicy(r0=6, r_min=6, r_max=10, eps_l=eps * 2, eps_u=1.1, m=0, adapt=True)
    new, diag = tdb_cur_step(state, model, 1e-3, sch, floored)
    assert diag.rank_action == "none"


def test_blowup_reported_with_time():
    model = BlowupModel(12, 12)
    state = initial_state(np.eye(12) + 0.01, 3)
    with pytest.raises(ModelBlowup) as info:
        tdb_cur_step(state, model, 1e-2, scheme("euler"), RankPolicy(r0=3, r_max=3))
    assert info.value.t == pytest.approx(0.0)


def dlra_factors(model, r):
    state = initial_state(model.initial_value(), r, pad_to_rank=True)
    return state.u, np.diag(state.sigma), state.y


def test_dlra_zero_dynamics_fixed_point():
    model = ZeroModel(10, 10)
    rng = np.random.default_rng(0)
    u, _ = np.linalg.qr(rng.normal(size=(10, 3)))
    y, _ = np.linalg.qr(rng.normal(size=(10, 3)))
    core = np.diag([3.0, 2.0, 1.0])
    u2, core2, y2 = dlra_step(u, core, y, model, 0.0, 0.1, scheme("rk4_classic"))
    assert np.allclose((u2 @ core2) @ y2.T, (u @ core) @ y.T, atol=1e-13)


def test_do_zero_dynamics_fixed_point():
    model = ZeroModel(10, 10)
    rng = np.random.default_rng(1)
    u, _ = np.linalg.qr(rng.normal(size=(10, 3)))
    y = rng.normal(size=(10, 3))
    u2, y2 = do_step(u, y, model, 0.0, 0.1, scheme("rk4_classic"))
    assert np.allclose(u2 @ y2.T, u @ y.T, atol=1e-13)


def test_dlra_tracks_optimal_at_moderate_rank():
    model, exact = toy_model(ToySpec(n=100, seed=11))
    sch = scheme("rk4_classic")
    u, core, y = dlra_factors(model, 8)
    t = 0.0
    for _ in range(1000):
        u, core, y = dlra_step(u, core, y, model, t, 1e-3, sch)
        t += 1e-3
    err = np.linalg.norm((u @ core) @ y.T - exact(1.0)) / np.linalg.norm(exact(1.0))
    assert err == pytest.approx(2.0**-8, rel=0.5)


def test_dlra_diverges_at_large_step():
    model, exact = toy_model(ToySpec(n=100, seed=11))
    sch = scheme("rk4_classic")
    failed_r = None
    for r in range(5, 11):
        u, core, y = dlra_factors(model, r)
        t = 0.0
        try:
            for _ in range(10):
                u, core, y = dlra_step(u, core, y, model, t, 1e-1, sch)
                t += 1e-1
            err = np.linalg.norm((u @ core) @ y.T - exact(1.0)) / np.linalg.norm(exact(1.0))
            if err > 1.0 or not np.isfinite(err):
                failed_r = r
                break
        except (BaselineSingular, ModelBlowup):
            failed_r = r
            break
    assert failed_r is not None and failed_r < 10


def test_dlra_rank_deficient_reports_singular():
    model, _ = toy_model(ToySpec(n=40, seed=1, rank_deficient=True))
    u, core, y = dlra_factors(model, 6)
    with pytest.raises(BaselineSingular):
        dlra_step(u, core, y, model, 0.0, 1e-3, scheme("rk4_classic"))


def test_do_matches_dlra_on_short_run():
    model, _ = toy_model(ToySpec(n=30, seed=2))
    sch = scheme("rk4_classic")
    u, core, y = dlra_factors(model, 4)
    u_do, y_do = u.copy(), (y * np.diag(core)).copy()
    t = 0.0
    for _ in range(10):
        u, core, y = dlra_step(u, core, y, model, t, 1e-4, sch)
        u_do, y_do = do_step(u_do, y_do, model, t, 1e-4, sch)
        t += 1e-4
    assert np.linalg.norm(u_do @ y_do.T - (u @ core) @ y.T) <= 1e-6


def test_fom_zero_dynamics():
    model = ZeroModel(8, 8)
    v0 = np.random.default_rng(3).normal(size=(8, 8))
    traj = fom_solve(model, v0, 0.1, scheme("rk4_classic"), 1.0)
    assert np.array_equal(traj.final, v0)


def test_fom_matches_closed_form():
    model, exact = toy_model(ToySpec(n=40, seed=6))
    traj = fom_solve(model, model.initial_value(), 1e-3, scheme("rk4_classic"), 1.0)
    ref = exact(1.0)
    assert np.linalg.norm(traj.final - ref) <= 1e-11 * np.linalg.norm(ref)


def test_fom_snapshots():
    model = ZeroModel(5, 5)
    v0 = np.eye(5)
    traj = fom_solve(model, v0, 0.1, scheme("euler"), 1.0, snapshot_times=[0.0, 0.5, 1.0])
    assert set(traj.snapshots) == {0.0, 0.5, 1.0}
    assert np.array_equal(traj.at(0.5), v0)


def test_fom_blowup():
    model = BlowupModel(6, 6)
    with pytest.raises(ModelBlowup):
        fom_solve(model, np.eye(6), 0.1, scheme("euler"), 1.0)


def test_relative_error_cases():
    rng = np.random.default_rng(8)
    state = initial_state(rng.normal(size=(12, 9)), 9)
    dense = state.dense()
    assert relative_error(state, dense) <= 1e-13
    ref = rng.normal(size=(12, 9))
    oracle = np.linalg.norm(dense - ref) / np.linalg.norm(ref)
    assert relative_error(state, ref) == pytest.approx(oracle, rel=1e-12)
    with pytest.raises(ZeroReference):
        relative_error(state, np.zeros((12, 9)))


def test_relative_error_zero_state_against_reference():
    ref = np.zeros((4, 4))
    ref[0, 0] = 2.0
    state = initial_state(np.eye(4) * 1e-300, 1, pad_to_rank=True)
    # a numerically-zero approximation of a norm-2 reference has error 1
    assert relative_error(state, ref) == pytest.approx(1.0)


def test_initial_state_truncation_error_matches_tail():
    rng = np.random.default_rng(9)
    v0 = rng.normal(size=(16, 10))
    sv = np.linalg.svd(v0, compute_uv=False)
    state = initial_state(v0, 4)
    tail = np.sqrt((sv[4:] ** 2).sum())
    assert np.linalg.norm(state.dense() - v0) == pytest.approx(tail, rel=1e-12)


def test_initial_state_exact_rank_detection():
    rng = np.random.default_rng(10)
    v0 = rng.normal(size=(14, 3)) @ rng.normal(size=(3, 11))
    state = initial_state(v0, 7)
    assert state.rank == 3
    padded = initial_state(v0, 7, pad_to_rank=True)
    assert padded.rank == 7
    assert (padded.sigma[3:] <= 1e-12 * padded.sigma[0]).all()


def test_initial_state_factored_matches_dense():
    rng = np.random.default_rng(11)
    left = rng.normal(size=(20, 4))
    right = rng.normal(size=(15, 4))
    a = initial_state((left, right), 4)
    b = initial_state(left @ right.T, 4)
    assert np.allclose(a.dense(), b.dense(), atol=1e-12)

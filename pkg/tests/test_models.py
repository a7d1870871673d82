import numpy as np
import pytest

from lowrank_mde import IndexVector, find_adjacent, fom_solve, initial_state, scheme
from lowrank_mde.models import (
    AdrSpec,
    BurgersSpec,
    ToySpec,
    adr_model,
    burgers_model,
    kl_expansion,
    toy_model,
)


def check_consistency(model, rows, cols, t=0.37, seed=0, scale=1.0, tol=1e-12):
    """The contract the sampled stepper relies on: restricted evaluations
    agree with the dense right-hand side."""
    rng = np.random.default_rng(seed)
    v = scale * rng.normal(size=(model.n, model.s))
    dense = model.rhs_full(t, v)
    cols = np.asarray(cols)
    got_cols = model.rhs_cols(t, v[:, cols], cols)
    assert np.abs(got_cols - dense[:, cols]).max() <= tol * max(1.0, np.abs(dense).max())
    p = IndexVector(np.asarray(rows), model.n)
    pa = find_adjacent(p, model.adjacency)
    cat = np.concatenate([p.indices, pa.indices])
    got_rows = model.rhs_rows(t, v[cat, :], p.indices, pa.indices)
    assert np.abs(got_rows - dense[p.indices, :]).max() <= tol * max(1.0, np.abs(dense).max())


def test_toy_consistency():
    # column coupling is dense: the column contract covers the all-columns call
    model, _ = toy_model(ToySpec(n=20, seed=2))
    check_consistency(model, rows=[0, 7, 19], cols=np.arange(20))


def test_burgers_consistency_interior_and_boundaries():
    model, _ = burgers_model(BurgersSpec(n=40, s=16, d=6))
    check_consistency(model, rows=[0, 1, 20, 38, 39], cols=[0, 5, 15])


def test_adr_consistency_interior_and_edges():
    spec = AdrSpec(nx=12, ny=8, s=9)
    model, _ = adr_model(spec)
    nx = spec.nx
    rows = [0, nx + 1, 3 * nx + nx - 1, 5 * nx + 6, model.n - 1]
    check_consistency(model, rows=rows, cols=[0, 4, 8])


def test_adr_consistency_without_outflow():
    model, _ = adr_model(AdrSpec(nx=10, ny=6, s=7, neumann_outflow=False))
    check_consistency(model, rows=[11, 25, 33], cols=[0, 3, 6])


def test_toy_exact_at_zero_is_diagonal():
    model, exact = toy_model(ToySpec(n=12, seed=4))
    assert np.allclose(exact(0.0), np.diag(0.5 ** np.arange(1, 13)))


def test_toy_exact_singular_values_grow_exponentially():
    model, exact = toy_model(ToySpec(n=15, seed=5))
    sv = np.linalg.svd(exact(0.7), compute_uv=False)
    assert np.allclose(sv, np.exp(0.7) * 0.5 ** np.arange(1, 16), rtol=1e-10)


def test_toy_rank_deficient_spectrum():
    model, exact = toy_model(ToySpec(n=12, seed=5, rank_deficient=True))
    d = model.d
    assert (d[5:] == 0).all() and (d[:5] > 0).all()
    assert np.linalg.matrix_rank(exact(0.5)) == 5


def test_toy_fom_matches_closed_form():
    model, exact = toy_model(ToySpec(n=40, seed=6))
    traj = fom_solve(model, model.initial_value(), 1e-3, scheme("rk4_classic"), 1.0)
    ref = exact(1.0)
    assert np.linalg.norm(traj.final - ref) <= 1e-11 * np.linalg.norm(ref)


def test_kl_eigenvalues_descending_positive():
    grid = np.linspace(0.0, 1.0, 101)
    lam, psi = kl_expansion(0.3, grid, 12)
    assert (lam > 0).all()
    assert (np.diff(lam) <= 0).all()
    assert psi.shape == (101, 12)


def test_kl_modes_weighted_orthonormal():
    grid = np.linspace(0.0, 1.0, 81)
    lam, psi = kl_expansion(0.2, grid, 8)
    h = grid[1] - grid[0]
    w = np.full(81, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    gram = (psi * w[:, None]).T @ psi
    assert np.linalg.norm(gram - np.eye(8)) <= 1e-10


def test_kl_trace_identity():
    grid = np.linspace(0.0, 1.0, 61)
    h = grid[1] - grid[0]
    w = np.full(61, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    kern = np.exp(-((grid[:, None] - grid[None, :]) ** 2) / (2 * 0.25**2))
    sq = np.sqrt(w)
    all_lam = np.linalg.eigvalsh(sq[:, None] * kern * sq[None, :])
    assert abs(all_lam.sum() - (np.diag(kern) * w).sum()) <= 1e-10
    lam, _ = kl_expansion(0.25, grid, 61)
    assert np.allclose(np.sort(lam)[::-1], np.sort(all_lam)[::-1][:61], atol=1e-12)


def test_kl_flat_kernel_leading_mode_constant():
    grid = np.linspace(0.0, 1.0, 51)
    lam, psi = kl_expansion(50.0, grid, 2)
    lead = psi[:, 0]
    assert np.abs(lead - lead.mean()).max() <= 1e-3 * np.abs(lead.mean())


def test_burgers_zero_noise_is_rank_one():
    model, v0 = burgers_model(BurgersSpec(n=60, s=20, d=5, sigma_noise=0.0))
    dense = v0[0] @ v0[1].T
    sv = np.linalg.svd(dense, compute_uv=False)
    assert (sv[1:] <= 1e-12 * sv[0]).all()
    assert np.allclose(dense, dense[:, :1])


def test_burgers_initial_rank_is_eighteen():
    model, v0 = burgers_model(BurgersSpec())
    sv = np.linalg.svd(v0[0] @ v0[1].T, compute_uv=False)
    assert int((sv > 1e-12 * sv[0]).sum()) == 18
    assert initial_state(v0, 18).rank == 18


def test_burgers_boundary_value_series():
    model, _ = burgers_model(BurgersSpec(n=30, s=8, d=3, sigma_noise=0.0))
    cols = np.arange(8)
    assert np.allclose(model.boundary_value(0.25, cols), -np.sin(np.pi / 2))
    model2, _ = burgers_model(BurgersSpec(n=30, s=8, d=3, sigma_noise=0.5, seed=3))
    lam_t = np.arange(1, 4) ** -2.0
    phi = np.sin(np.arange(1, 4) * np.pi * 0.25)
    oracle = -np.sin(np.pi / 2) + 0.5 * (lam_t * phi) @ model2.xi
    assert np.allclose(model2.boundary_value(0.25, cols), oracle)


def test_burgers_diffusion_dominated_decay():
    model, v0 = burgers_model(
        BurgersSpec(n=101, s=6, d=3, nu=0.1, sigma_noise=0.0, penalty_tau=0.0)
    )
    traj = fom_solve(
        model,
        v0[0] @ v0[1].T,
        1e-4,
        scheme("rk4_classic"),
        0.05,
        snapshot_times=np.linspace(0.005, 0.05, 10),
    )
    norms = [np.linalg.norm(traj.snapshots[t]) for t in sorted(traj.snapshots)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_adr_reaction_values():
    model, _ = adr_model(AdrSpec(nx=8, ny=6, s=4))
    assert model.reaction(np.array(0.0)) == 0.0
    assert model.reaction(np.array(10.0)) == pytest.approx(5.0)


def test_adr_initial_rank_one():
    model, v0 = adr_model(AdrSpec(nx=24, ny=12, s=30))
    state = initial_state(v0, 1)
    assert state.rank == 1
    dense = model.initial_value()
    assert np.linalg.matrix_rank(dense) == 1
    assert state.sigma[0] == pytest.approx(
        np.linalg.norm(model.initial_column()) * np.sqrt(30), rel=1e-12
    )


def test_adr_alpha_bounded_by_resampling():
    model, _ = adr_model(AdrSpec(nx=8, ny=6, s=500, xi_mean=30.0, xi_std=25.0, seed=2))
    assert (model.alpha > 0).all()
    assert (model.alpha < 0.1).all()  # all xi > 10


def test_adr_velocity_profile():
    model, _ = adr_model(AdrSpec(nx=10, ny=9, s=4, u_max=2.0))
    assert model.u1[0] == pytest.approx(0.0)  # walls
    assert model.u1[-1] == pytest.approx(0.0)
    assert model.u1[4] == pytest.approx(2.0)  # centerline x2 = 0


def test_adr_pure_diffusion_mass_decay():
    spec = AdrSpec(nx=16, ny=10, s=5, u_max=0.0, with_reaction=False, neumann_outflow=False)
    model, _ = adr_model(spec)
    v0 = model.initial_value()
    times = np.linspace(0.05, 0.5, 10)
    traj = fom_solve(model, v0, 5e-4, scheme("rk4_classic"), 0.5, snapshot_times=times)
    mass = [traj.snapshots[t].sum() for t in sorted(traj.snapshots)]
    assert all(a >= b for a, b in zip(mass, mass[1:]))
    assert mass[0] <= v0.sum()


def test_model_seeds_are_independent_streams():
    a, _ = burgers_model(BurgersSpec(n=30, s=8, d=3, seed=5))
    b, _ = adr_model(AdrSpec(nx=8, ny=6, s=8, seed=5))
    t, _ = toy_model(ToySpec(n=8, seed=5))
    # same root seed, distinct spawned streams: draws must differ
    assert not np.allclose(a.xi[0, :4], b.alpha[:4])
    assert not np.allclose(t.w1[0, :4], a.xi[0, :4])

import numpy as np
import pytest

from romstab import pod, rom
from romstab.closures import ClosureSpec
from romstab.errors import DimensionMismatch, GridMismatch
from romstab.fem import GridSpec, PhysicalParams, StateField, assemble, integrate, rhs, step_initial_state
from romstab.rom import RomState, RomTrajectory, project_tensors, rom_rhs


def full_rank_bases(ops, params, rng, s=40):
    n = ops.n_nodes
    W = rng.normal(size=(s, n))
    W[:, 0] = params.w_left
    T = rng.normal(size=(s, n))
    T[:, 0] = params.T_left
    T[:, -1] = params.T_right
    bw = pod.pod_basis(W, ops.weights, pod.max_rank(W, ops.weights), "velocity")
    bT = pod.pod_basis(T, ops.weights, pod.max_rank(T, ops.weights), "temperature")
    return bw, bT


def projected_fem_rate(ops, params, bw, bT, q, t):
    w = pod.reconstruct(bw, q[: bw.r])
    T = pod.reconstruct(bT, q[bw.r:])
    f = rhs(ops, params, StateField(w, T, t))
    return np.concatenate([pod.project_rate(bw, f.w), pod.project_rate(bT, f.T)])


@pytest.fixture(scope="module")
def full_rank(small_problem):
    grid, params, ops = small_problem
    rng = np.random.default_rng(99)
    bw, bT = full_rank_bases(ops, params, rng)
    return grid, params, ops, bw, bT, project_tensors(ops, params, bw, bT)


def test_full_rank_dimensions(full_rank):
    grid, _, _, bw, bT, ten = full_rank
    # free nodes: velocity has the Neumann end free, temperature has none
    assert bw.r == grid.n_nodes - 1
    assert bT.r == grid.n_nodes - 2
    assert ten.C.shape == (ten.r,) * 3


def test_galerkin_consistency_full_rank(full_rank, rng):
    _, params, ops, bw, bT, ten = full_rank
    profile = np.full(ten.r, params.mu)
    for _ in range(20):
        q = rng.normal(size=ten.r)
        t = rng.uniform()
        got = rom_rhs(ten, profile, RomState(q, t))
        want = projected_fem_rate(ops, params, bw, bT, q, t)
        assert np.linalg.norm(got - want) <= 1e-8 * np.linalg.norm(want)


def test_galerkin_consistency_truncated(test1_setup, rng):
    s = test1_setup
    ten = s.tensors
    profile = np.full(ten.r, s.params.mu)
    for _ in range(10):
        q = rng.normal(scale=0.3, size=ten.r)
        got = rom_rhs(ten, profile, RomState(q))
        want = projected_fem_rate(s.ops, s.params, s.basis_w, s.basis_T, q, 0.0)
        assert np.linalg.norm(got - want) <= 1e-8 * np.linalg.norm(want)


def test_full_rank_trajectory_matches_fem(full_rank):
    grid, params, ops, bw, bT, ten = full_rank
    times = np.linspace(0.0, 0.1, 11)
    init = step_initial_state(grid, params)
    truth = integrate(ops, params, init, 0.1, times)
    q0 = rom.initial_coefficients(bw, bT, init.w, init.T)
    fields = rom.reconstruct(bw, bT, rom.integrate_rom(ten, None, q0, 0.1, times))
    assert np.abs(fields.w - truth.w).max() <= 1e-4 * np.abs(truth.w).max()
    assert np.abs(fields.T - truth.T).max() <= 1e-4 * np.abs(truth.T).max()


def test_zero_modes_zero_tensors():
    grid = GridSpec(10)
    ops = assemble(grid)
    params = PhysicalParams(mu=1e-3, kappa=5e-4, c=1e-2)
    wts = ops.weights
    zero = pod.PodBasis(np.zeros((grid.n_nodes, 2)), np.ones(2), np.zeros(grid.n_nodes), wts)
    ten = project_tensors(ops, params, zero, zero)
    for arr in (ten.B1, ten.B2, ten.D, ten.Dtilde, ten.C):
        assert np.all(arr == 0)


def test_trivial_bcs_and_no_forcing(test1_setup):
    ten = test1_setup.tensors
    assert ten.forcing_map is None
    assert np.all(ten.forcing_rate(0.3) == 0)
    # B2 holds the Neumann flux (zero here) plus the viscous action on the mean
    s = test1_setup
    mean_part = np.zeros(ten.r)
    mean_part[: ten.r_w] = pod.project_rate(s.basis_w, s.ops.solve_w(-(s.ops.S @ s.basis_w.mean)))
    np.testing.assert_allclose(ten.B2, mean_part, atol=1e-12)


def test_forcing_projection(small_problem, rng):
    grid, params, ops = small_problem
    bw, bT = full_rank_bases(ops, params, rng)
    ten = project_tensors(ops, params, bw, bT)
    f = params.forcing(0.4, grid.nodes)
    ref = pod.project_rate(bT, ops.solve_T(ops.M @ f))
    np.testing.assert_allclose(ten.forcing_rate(0.4)[bw.r:], ref, atol=1e-12)


def test_grid_mismatch(test1_setup):
    ops = assemble(GridSpec(20))
    with pytest.raises(GridMismatch):
        project_tensors(ops, test1_setup.params, test1_setup.basis_w, test1_setup.basis_T)


def test_velocity_diagonal_dissipative(test1_setup):
    ten = test1_setup.tensors
    assert np.all(ten.d_diag[: ten.r_w] < 0)
    assert np.all(ten.d_diag[ten.r_w:] == 0)


def test_zero_state_zero_rate(test1_setup):
    ten = test1_setup.tensors
    zero_b = rom.RomTensors(
        np.zeros(ten.r), np.zeros(ten.r), ten.D, ten.Dtilde, ten.C, ten.D_heat,
        ten.r_w, ten.r_T, ten.mu, ten.c, ten.lambdas,
    )
    rate = rom_rhs(zero_b, np.full(ten.r, ten.mu), RomState(np.zeros(ten.r)))
    assert np.all(rate == 0)


def test_polynomial_scaling(test1_setup, rng):
    ten = test1_setup.tensors
    q = rng.normal(size=ten.r)
    lin = ten.mu * (ten.D @ q) + ten.Dtilde @ q
    quad = rom.quadratic(ten.C, q)
    np.testing.assert_allclose(ten.mu * (ten.D @ (2 * q)) + ten.Dtilde @ (2 * q), 2 * lin, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(rom.quadratic(ten.C, 2 * q), 4 * quad, rtol=1e-12, atol=1e-12)
    const = ten.B1 + ten.mu * ten.B2
    profile = np.full(ten.r, ten.mu)
    total = rom_rhs(ten, profile, RomState(q))
    np.testing.assert_allclose(total, const + lin + quad, rtol=1e-12, atol=1e-12)


def test_closure_off_is_rom_g(test1_setup, rng):
    ten = test1_setup.tensors
    from romstab.closures import rom_closure_terms

    profile, heat, penalty = rom_closure_terms(ClosureSpec("none"), ten)
    q = rng.normal(size=ten.r)
    a = rom_rhs(ten, profile, RomState(q), None if penalty is None else penalty(q), heat)
    b = rom_rhs(ten, np.full(ten.r, ten.mu), RomState(q))
    assert np.array_equal(a, b)
    profile, heat, penalty = rom_closure_terms(ClosureSpec("H", mu_e=0.0), ten)
    assert np.array_equal(rom_rhs(ten, profile, RomState(q)), b)


def test_rom_rhs_dimension_mismatch(test1_setup):
    ten = test1_setup.tensors
    with pytest.raises(DimensionMismatch):
        rom_rhs(ten, np.zeros(3), RomState(np.zeros(ten.r)))


def test_zero_trajectory(test1_setup):
    ten = test1_setup.tensors
    zero_b = rom.RomTensors(
        np.zeros(ten.r), np.zeros(ten.r), ten.D, ten.Dtilde, ten.C, ten.D_heat,
        ten.r_w, ten.r_T, ten.mu, ten.c, ten.lambdas,
    )
    traj = rom.integrate_rom(zero_b, None, RomState(np.zeros(ten.r)), 1.0)
    assert not traj.diverged
    assert np.all(traj.q == 0)


def test_rom_g_differs_from_truth(test1_setup):
    s = test1_setup
    traj, fields = s.simulate(None)
    assert not traj.diverged
    assert np.abs(fields.w - s.truth.w).max() > 1e-2


def test_divergence_is_flagged(test1_setup):
    ten = test1_setup.tensors
    unstable = rom.RomTensors(
        ten.B1, ten.B2, ten.D, ten.Dtilde + 50.0 * np.eye(ten.r), ten.C, ten.D_heat,
        ten.r_w, ten.r_T, ten.mu, ten.c, ten.lambdas,
    )
    traj = rom.integrate_rom(unstable, None, test1_setup.q0, 1.0)
    assert traj.diverged
    assert traj.diverged_at is not None and traj.diverged_at < 1.0
    assert traj.times.size < 101


def test_reconstruct_identities(test1_setup):
    s = test1_setup
    r = s.tensors.r
    traj = RomTrajectory(np.array([0.0, 1.0]), np.vstack([np.zeros(r), np.eye(r)[0]]))
    fields = rom.reconstruct(s.basis_w, s.basis_T, traj)
    np.testing.assert_array_equal(fields.w[0], s.basis_w.mean)
    np.testing.assert_array_equal(fields.T[0], s.basis_T.mean)
    np.testing.assert_allclose(fields.w[1], s.basis_w.mean + s.basis_w.modes[:, 0], atol=1e-15)
    with pytest.raises(DimensionMismatch):
        rom.reconstruct(s.basis_w, s.basis_T, RomTrajectory(np.array([0.0]), np.zeros((1, 3))))


def test_project_then_reconstruct(test1_setup):
    s = test1_setup
    z = s.truth.w[50]
    b = s.basis_w
    q = pod.project(b, z)
    rec = pod.reconstruct(b, q)
    span_part = b.mean + b.modes @ (b.modes.T @ (b.weights * (z - b.mean)))
    np.testing.assert_allclose(rec, span_part, atol=1e-10)

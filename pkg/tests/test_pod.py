import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from romstab import pod
from romstab.errors import DimensionMismatch, EmptySnapshotSet, RankDeficient
from romstab.fem import GridSpec, trapezoid_weights

GRID = GridSpec(100)
X = GRID.nodes
WTS = trapezoid_weights(GRID)


def test_single_snapshot_correlation():
    K = pod.correlation(np.sin(np.pi * X), WTS)
    assert K.K.shape == (1, 1)
    # composite trapezoid of sin^2 on a uniform grid integrates it exactly
    assert K.K[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_duplicate_snapshots_rank_one():
    z = np.sin(np.pi * X)
    Z = np.vstack([z, z])
    lam, _ = pod.spectrum(pod.correlation(Z, WTS))
    assert pod.numerical_rank(Z, WTS) == 1
    assert abs(lam[1]) <= 1e-12 * lam[0]


def test_svd_matches_correlation_eigenpairs(test1_setup):
    F = test1_setup.truth.w - test1_setup.truth.w.mean(axis=0)
    lam, V = pod.spectrum(pod.correlation(F, WTS))
    sigma, U, _ = pod.weighted_svd(F, WTS)
    np.testing.assert_allclose(sigma[:10] ** 2, lam[:10], rtol=1e-10)
    # leading eigenvectors agree up to sign
    overlap = np.abs(np.sum(U[:, :10] * V[:, :10], axis=0))
    np.testing.assert_allclose(overlap, 1.0, atol=1e-8)


def test_orthogonal_snapshots():
    Z = np.vstack([np.sin(np.pi * X), np.sin(2 * np.pi * X)])
    K = pod.correlation(Z, WTS)
    assert abs(K.K[0, 1]) <= 1e-10


def test_correlation_errors():
    with pytest.raises(EmptySnapshotSet):
        pod.correlation(np.zeros((0, 5)), WTS[:5])
    with pytest.raises(DimensionMismatch):
        pod.correlation(np.zeros((3, 7)), WTS)


def _unit(v):
    return v / np.sqrt(v @ (WTS * v))


def test_analytic_pair_basis():
    Z = np.sqrt(2) * np.vstack([np.sin(np.pi * X), np.sin(2 * np.pi * X)])
    basis = pod.build_basis(Z, 2, WTS)
    np.testing.assert_allclose(basis.gram(), np.eye(2), atol=1e-10)
    # equal energies make K a multiple of I: modes are fixed only up to a rotation
    for k in (1, 2):
        target = _unit(np.sin(k * np.pi * X))
        coeffs = basis.modes.T @ (WTS * target)
        assert np.linalg.norm(coeffs) == pytest.approx(1.0, abs=1e-10)


def test_analytic_pair_distinct_energies():
    Z = np.vstack([2 * np.sin(np.pi * X), np.sin(2 * np.pi * X)])
    basis = pod.build_basis(Z, 2, WTS)
    np.testing.assert_allclose(basis.gram(), np.eye(2), atol=1e-10)
    for k in (1, 2):
        np.testing.assert_allclose(basis.modes[:, k - 1], _unit(np.sin(k * np.pi * X)), atol=1e-10)
    np.testing.assert_allclose(basis.eigenvalues, [1.0, 0.25], rtol=1e-12)


def test_rank_deficient():
    Z = np.vstack([np.sin(np.pi * X), 2 * np.sin(np.pi * X)])
    with pytest.raises(RankDeficient) as info:
        pod.build_basis(Z, 2, WTS)
    assert info.value.rank == 1


@pytest.fixture(scope="module")
def random_snapshots():
    rng = np.random.default_rng(7)
    g = GridSpec(20)
    return rng.normal(size=(15, g.n_nodes)), trapezoid_weights(g)


def test_full_rank_reconstruction(random_snapshots):
    Z, wts = random_snapshots
    r = pod.max_rank(Z, wts)
    basis = pod.pod_basis(Z, wts, r)
    for z in Z:
        rec = pod.reconstruct(basis, pod.project(basis, z))
        assert np.linalg.norm(rec - z) <= 1e-8 * np.linalg.norm(z)
    with pytest.raises(RankDeficient):
        pod.pod_basis(Z, wts, r + 1)


def test_energy_identity(random_snapshots):
    Z, wts = random_snapshots
    r = pod.max_rank(Z, wts)
    basis = pod.pod_basis(Z, wts, r)
    fl = Z - Z.mean(axis=0)
    energy = np.mean([f @ (wts * f) for f in fl])
    assert basis.eigenvalues.sum() == pytest.approx(energy, rel=1e-8)


def test_basis_invariants(test1_setup):
    for basis in (test1_setup.basis_w, test1_setup.basis_T):
        np.testing.assert_allclose(basis.gram(), np.eye(basis.r), atol=1e-10)
        assert np.all(np.diff(basis.eigenvalues) <= 0)
        assert np.all(basis.eigenvalues > 0)
        assert basis.r <= min(test1_setup.truth.s, basis.n_nodes)
        peak = np.abs(basis.modes).argmax(axis=0)
        assert np.all(basis.modes[peak, np.arange(basis.r)] > 0)


def test_project_mean_and_mode(test1_setup):
    b = test1_setup.basis_w
    np.testing.assert_allclose(pod.project(b, b.mean), 0.0, atol=1e-12)
    q = pod.project(b, b.mean + 3 * b.modes[:, 0])
    expected = np.zeros(b.r)
    expected[0] = 3.0
    np.testing.assert_allclose(q, expected, atol=1e-10)


def test_projection_residual_orthogonal(test1_setup, rng):
    b = test1_setup.basis_T
    field = rng.normal(size=b.n_nodes)
    residual = field - pod.reconstruct(b, pod.project(b, field))
    np.testing.assert_allclose(b.modes.T @ (b.weights * residual), 0.0, atol=1e-10)


def test_more_modes_reduce_error(test1_setup):
    truth = test1_setup.truth
    wts = test1_setup.ops.weights
    b10 = pod.pod_basis(truth.w, wts, 10)
    b5 = b10.truncate(5)
    for z in truth.w:
        e10 = z - pod.reconstruct(b10, pod.project(b10, z))
        e5 = z - pod.reconstruct(b5, pod.project(b5, z))
        assert e10 @ (wts * e10) <= e5 @ (wts * e5) + 1e-15


def test_project_dimension_mismatch(test1_setup):
    with pytest.raises(DimensionMismatch):
        pod.project(test1_setup.basis_w, np.zeros(7))
    with pytest.raises(DimensionMismatch):
        pod.reconstruct(test1_setup.basis_w, np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_idempotent(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(16)
    wts = trapezoid_weights(g)
    Z = rng.normal(size=(8, g.n_nodes))
    basis = pod.pod_basis(Z, wts, 5)
    q = rng.normal(size=5)
    np.testing.assert_allclose(pod.project(basis, pod.reconstruct(basis, q)), q, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ordering_invariance(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(16)
    wts = trapezoid_weights(g)
    Z = rng.normal(size=(10, g.n_nodes))
    perm = rng.permutation(10)
    a = pod.pod_basis(Z, wts, 4)
    b = pod.pod_basis(Z[perm], wts, 4)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10, atol=1e-12)
    # modes agree up to sign; the sign convention makes them identical
    for j in range(4):
        overlap = abs(a.modes[:, j] @ (wts * b.modes[:, j]))
        assert overlap == pytest.approx(1.0, abs=1e-8)

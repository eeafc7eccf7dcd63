"""Method-of-snapshots POD with a trapezoid-weighted inner product."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, EmptySnapshotSet, RankDeficient

@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    K: np.ndarray

    @property
    def s(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True, eq=False)
class PodBasis:
    """Orthonormal modes stored as columns of ``modes`` (n_nodes x r)."""

    modes: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray
    weights: np.ndarray
    field_tag: str = "velocity"

    @property
    def r(self) -> int:
        return self.modes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.modes.shape[0]

    def gram(self) -> np.ndarray:
        return self.modes.T @ (self.weights[:, None] * self.modes)

    def truncate(self, r: int) -> "PodBasis":
        if r > self.r:
            raise RankDeficient(r, self.r)
        return PodBasis(self.modes[:, :r], self.eigenvalues[:r], self.mean, self.weights, self.field_tag)


def _as_snapshot_matrix(snapshots) -> np.ndarray:
    Z = np.asarray(snapshots, dtype=float)
    if Z.size == 0:
        raise EmptySnapshotSet("no snapshots given")
    if Z.ndim == 1:
        Z = Z[None, :]
    if Z.ndim != 2:
        raise DimensionMismatch(f"snapshots must be (s, n), got shape {Z.shape}")
    return Z


def correlation(snapshots, weights: np.ndarray) -> CorrelationMatrix:
    """K_ij = <z_i, z_j> / s for snapshots stacked as rows."""
    Z = _as_snapshot_matrix(snapshots)
    if Z.shape[1] != weights.shape[0]:
        raise DimensionMismatch(
            f"snapshots have {Z.shape[1]} entries, inner product expects {weights.shape[0]}"
        )
    s = Z.shape[0]
    K = (Z * weights) @ Z.T / s
    return CorrelationMatrix(0.5 * (K + K.T))


def spectrum(K: CorrelationMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of K sorted by decreasing eigenvalue; eigenvectors in columns."""
    lam, V = sla.eigh(K.K)
    order = np.argsort(lam)[::-1]
    return lam[order], V[:, order]


def weighted_svd(snapshots, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD of the scaled snapshot matrix ``A = Z W^{1/2} / sqrt(s)``.

    ``K = A A^T``, so the left singular vectors are the eigenvectors of the
    correlation matrix and ``sigma**2`` its eigenvalues. Working on ``A``
    resolves the small end of the spectrum to eps * sigma_max instead of
    eps * lambda_max.
    """
    Z = _as_snapshot_matrix(snapshots)
    if Z.shape[1] != weights.shape[0]:
        raise DimensionMismatch(
            f"snapshots have {Z.shape[1]} entries, inner product expects {weights.shape[0]}"
        )
    if np.any(weights <= 0):
        raise ValueError("inner-product weights must be positive")
    A = Z * np.sqrt(weights) / np.sqrt(Z.shape[0])
    U, sigma, Vt = sla.svd(A, full_matrices=False, lapack_driver="gesvd")
    return sigma, U, Vt


def rank_from_singular_values(sigma: np.ndarray, shape: tuple[int, int]) -> int:
    """Same convention as numpy.linalg.matrix_rank: sigma > max(shape) * eps * sigma_max."""
    if sigma.size == 0 or sigma[0] <= 0:
        return 0
    tol = max(shape) * np.finfo(float).eps * sigma[0]
    return int(np.count_nonzero(sigma > tol))


def numerical_rank(snapshots, weights: np.ndarray) -> int:
    Z = _as_snapshot_matrix(snapshots)
    sigma, _, _ = weighted_svd(Z, weights)
    return rank_from_singular_values(sigma, Z.shape)


def build_basis(
    snapshots,
    r: int,
    weights: np.ndarray,
    mean: Optional[np.ndarray] = None,
    field_tag: str = "velocity",
) -> PodBasis:
    r"""POD modes phi_i = (s lambda_i)^{-1/2} \sum_j v_{i,j} z_j.

    ``snapshots`` are used as given (subtract the mean first for a
    fluctuation basis). The modes are computed as ``W^{-1/2}`` times the
    right singular vectors, which equals the formula above and is
    W-orthonormal to round-off. Each mode is flipped so that its
    largest-magnitude entry is positive.
    """
    Z = _as_snapshot_matrix(snapshots)
    sigma, _, Vt = weighted_svd(Z, weights)
    rank = rank_from_singular_values(sigma, Z.shape)
    if r > rank:
        raise RankDeficient(r, rank)
    modes = Vt[:r].T / np.sqrt(weights)[:, None]
    peak = np.argmax(np.abs(modes), axis=0)
    signs = np.sign(modes[peak, np.arange(r)])
    signs[signs == 0] = 1.0
    modes = modes * signs
    if mean is None:
        mean = np.zeros(Z.shape[1])
    return PodBasis(modes, sigma[:r] ** 2, np.asarray(mean, dtype=float), weights, field_tag)


def pod_basis(snapshots, weights: np.ndarray, r: int, field_tag: str = "velocity") -> PodBasis:
    """Fluctuation POD: subtract the temporal mean, then build ``r`` modes."""
    Z = _as_snapshot_matrix(snapshots)
    mean = Z.mean(axis=0)
    return build_basis(Z - mean, r, weights, mean, field_tag)


def max_rank(snapshots, weights: np.ndarray) -> int:
    Z = _as_snapshot_matrix(snapshots)
    return numerical_rank(Z - Z.mean(axis=0), weights)


def project(basis: PodBasis, field: np.ndarray) -> np.ndarray:
    """Coefficients q_i = <field - mean, phi_i>; accepts (n,) or (s, n)."""
    field = np.asarray(field, dtype=float)
    if field.shape[-1] != basis.n_nodes:
        raise DimensionMismatch(f"field has {field.shape[-1]} entries, basis has {basis.n_nodes}")
    return (field - basis.mean) @ (basis.weights[:, None] * basis.modes)


def project_rate(basis: PodBasis, rate: np.ndarray) -> np.ndarray:
    """Project a time derivative; the mean is constant so it is not subtracted."""
    rate = np.asarray(rate, dtype=float)
    if rate.shape[-1] != basis.n_nodes:
        raise DimensionMismatch(f"rate has {rate.shape[-1]} entries, basis has {basis.n_nodes}")
    return rate @ (basis.weights[:, None] * basis.modes)


def reconstruct(basis: PodBasis, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != basis.r:
        raise DimensionMismatch(f"coefficients have length {q.shape[-1]}, basis has r={basis.r}")
    return basis.mean + q @ basis.modes.T

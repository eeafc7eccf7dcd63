"""Galerkin POD reduced-order model of the coupled Burgers system.

The reduced state is ``q = (q_w, q_T)`` and the right-hand side is

    dq/dt = B1 + mu B2 + mu D q + Dtilde q + C(q, q)

where every tensor is obtained by projecting the semi-discrete FEM rates
onto the POD modes with the trapezoid inner product, so the ROM rate at
``q`` equals the projected FEM rate at the reconstructed field.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import pod as podmod
from .errors import DimensionMismatch, GridMismatch
from .fem import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    FemOperators,
    PhysicalParams,
    SnapshotSet,
    convection_load,
)
from .pod import PodBasis

DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True, eq=False)
class RomTensors:
    B1: np.ndarray
    B2: np.ndarray
    D: np.ndarray
    Dtilde: np.ndarray
    C: np.ndarray
    D_heat: np.ndarray  # projected -S on temperature rows; c * D_heat is part of Dtilde
    r_w: int
    r_T: int
    mu: float
    c: float
    lambdas: np.ndarray
    forcing_map: Optional[np.ndarray] = None  # (r, n_nodes): nodal f -> reduced rate
    forcing: Optional[Callable] = field(default=None, repr=False)
    x: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def r(self) -> int:
        return self.r_w + self.r_T

    @property
    def d_diag(self) -> np.ndarray:
        return np.diag(self.D).copy()

    def forcing_rate(self, t: float) -> np.ndarray:
        if self.forcing_map is None or self.forcing is None:
            return np.zeros(self.r)
        f = np.broadcast_to(np.asarray(self.forcing(t, self.x), dtype=float), self.x.shape)
        return self.forcing_map @ f


@dataclass(frozen=True)
class RomState:
    q: np.ndarray
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class RomTrajectory:
    times: np.ndarray
    q: np.ndarray  # (len(times), r)
    diverged: bool = False
    diverged_at: Optional[float] = None

    @property
    def states(self) -> list[RomState]:
        return [RomState(qk, t) for t, qk in zip(self.times, self.q)]


@dataclass(frozen=True, eq=False)
class FieldTrajectory:
    """Nodal fields sampled in time; shares the SnapshotSet layout."""

    times: np.ndarray
    w: np.ndarray
    T: np.ndarray
    x: np.ndarray
    diverged: bool = False

    @classmethod
    def from_snapshots(cls, snaps: SnapshotSet) -> "FieldTrajectory":
        return cls(snaps.times, snaps.w, snaps.T, snaps.x)


def project_tensors(
    ops: FemOperators, params: PhysicalParams, basis_w: PodBasis, basis_T: PodBasis
) -> RomTensors:
    n = ops.n_nodes
    if basis_w.n_nodes != n or basis_T.n_nodes != n:
        raise GridMismatch(
            f"bases have {basis_w.n_nodes}/{basis_T.n_nodes} nodes, operators have {n}"
        )
    rw, rT = basis_w.r, basis_T.r
    r = rw + rT
    Pw = (ops.weights[:, None] * basis_w.modes).T  # rate -> q_w rate
    PT = (ops.weights[:, None] * basis_T.modes).T
    Phi_w, Phi_T = basis_w.modes, basis_T.modes
    w_av, T_av = basis_w.mean, basis_T.mean
    sw, sT = slice(0, rw), slice(rw, r)

    def pw(load):
        return Pw @ ops.solve_w(load)

    def pT(load):
        return PT @ ops.solve_T(load)

    B1 = np.zeros(r)
    B1[sw] = pw(-params.kappa * (ops.M @ T_av) - convection_load(w_av, w_av))
    B1[sT] = pT(-params.c * (ops.S @ T_av) - convection_load(w_av, T_av))

    B2 = np.zeros(r)
    B2[sw] = pw(-(ops.S @ w_av) + params.w_right * ops.neumann)

    D = np.zeros((r, r))
    Dt = np.zeros((r, r))
    D_heat = np.zeros((r, r))
    for k in range(rw):
        phi = Phi_w[:, k]
        D[sw, k] = pw(-(ops.S @ phi))
        Dt[sw, k] = pw(-convection_load(w_av, phi) - convection_load(phi, w_av))
        Dt[sT, k] = pT(-convection_load(phi, T_av))
    for k in range(rT):
        phi = Phi_T[:, k]
        Dt[sw, rw + k] = pw(-params.kappa * (ops.M @ phi))
        D_heat[sT, rw + k] = pT(-(ops.S @ phi))
        Dt[sT, rw + k] = params.c * D_heat[sT, rw + k] + pT(-convection_load(w_av, phi))

    C = np.zeros((r, r, r))
    for j in range(rw):
        a = Phi_w[:, j]
        for k in range(rw):
            C[sw, j, k] = pw(-convection_load(a, Phi_w[:, k]))
        for k in range(rT):
            C[sT, j, rw + k] = pT(-convection_load(a, Phi_T[:, k]))

    forcing_map = None
    if params.forcing is not None:
        forcing_map = np.zeros((r, n))
        for node in ops.T_free:
            e = np.zeros(n)
            e[node] = 1.0
            forcing_map[sT, node] = pT(ops.M @ e)

    return RomTensors(
        B1=B1,
        B2=B2,
        D=D,
        Dtilde=Dt,
        C=C,
        D_heat=D_heat,
        r_w=rw,
        r_T=rT,
        mu=params.mu,
        c=params.c,
        lambdas=np.concatenate([basis_w.eigenvalues, basis_T.eigenvalues]),
        forcing_map=forcing_map,
        forcing=params.forcing,
        x=ops.grid.nodes,
    )


def quadratic(C: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vector of quadratic forms sum_jk C_ijk q_j q_k."""
    return np.einsum("ijk,j,k->i", C, q, q)


def rom_rhs(
    tensors: RomTensors,
    viscosity_profile: np.ndarray,
    state: RomState,
    penalty: Optional[np.ndarray] = None,
    heat_profile: Optional[np.ndarray] = None,
    b2_scale: Optional[float] = None,
) -> np.ndarray:
    """Reduced rate with a per-mode viscosity on the viscous term.

    ``heat_profile`` (length r) replaces the diffusivity ``c`` on the heat
    diffusion rows when given. ``b2_scale`` overrides the physical ``mu``
    multiplying B2.
    """
    q = np.asarray(state.q, dtype=float)
    r = tensors.r
    if q.shape != (r,) or np.shape(viscosity_profile) != (r,):
        raise DimensionMismatch(
            f"expected length-{r} state and profile, got {q.shape} and {np.shape(viscosity_profile)}"
        )
    mu_b2 = tensors.mu if b2_scale is None else b2_scale
    rate = viscosity_profile * (tensors.D @ q) + tensors.Dtilde @ q + quadratic(tensors.C, q)
    rate = rate + tensors.B1 + mu_b2 * tensors.B2
    if tensors.forcing_map is not None:
        rate = rate + tensors.forcing_rate(state.t)
    if heat_profile is not None:
        rate = rate + (np.asarray(heat_profile) - tensors.c) * (tensors.D_heat @ q)
    if penalty is not None:
        rate = rate + penalty
    return rate


def integrate_rom(
    tensors: RomTensors,
    closure,
    q0: RomState,
    t_f: float,
    t_eval: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    threshold: float = DIVERGENCE_THRESHOLD,
) -> RomTrajectory:
    """Integrate the ROM with the given closure; divergence is reported, not raised.

    ``closure`` is a :class:`romstab.closures.ClosureSpec` or ``None``.
    """
    from .closures import ClosureSpec, rom_closure_terms

    if not t_f > 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    if closure is None:
        closure = ClosureSpec("none")
    profile, heat_profile, penalty_fn = rom_closure_terms(closure, tensors)
    if t_eval is None:
        t_eval = np.linspace(0.0, t_f, 101)
    t_eval = np.asarray(t_eval, dtype=float)

    def fun(t, q):
        pen = penalty_fn(q) if penalty_fn is not None else None
        return rom_rhs(tensors, profile, RomState(q, t), pen, heat_profile)

    def blowup(t, q):
        if not np.all(np.isfinite(q)):
            return -1.0
        return threshold - np.linalg.norm(q)

    blowup.terminal = True
    blowup.direction = -1

    q_init = np.asarray(q0.q, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(
            fun, (q0.t, q0.t + t_f), q_init, method="RK45", t_eval=t_eval + q0.t,
            rtol=rtol, atol=atol, events=blowup,
        )
    Q = sol.y.T
    finite = np.all(np.isfinite(Q), axis=1)
    diverged = sol.status != 0 or not finite.all() or sol.t.size < t_eval.size
    diverged_at = None
    if diverged:
        if sol.t_events is not None and len(sol.t_events[0]):
            diverged_at = float(sol.t_events[0][0])
        elif sol.t.size:
            diverged_at = float(sol.t[-1])
        else:
            diverged_at = float(q0.t)
        keep = finite
        return RomTrajectory(sol.t[keep], Q[keep], True, diverged_at)
    return RomTrajectory(sol.t, Q, False, None)


def reconstruct(basis_w: PodBasis, basis_T: PodBasis, traj: RomTrajectory) -> FieldTrajectory:
    rw = basis_w.r
    if traj.q.shape[1] != rw + basis_T.r:
        raise DimensionMismatch(
            f"trajectory has {traj.q.shape[1]} coefficients, bases have {rw}+{basis_T.r}"
        )
    w = podmod.reconstruct(basis_w, traj.q[:, :rw])
    T = podmod.reconstruct(basis_T, traj.q[:, rw:])
    return FieldTrajectory(traj.times, w, T, np.linspace(0.0, 1.0, basis_w.n_nodes), traj.diverged)


def initial_coefficients(basis_w: PodBasis, basis_T: PodBasis, w0: np.ndarray, T0: np.ndarray, t: float = 0.0) -> RomState:
    q = np.concatenate([podmod.project(basis_w, w0), podmod.project(basis_T, T0)])
    return RomState(q, t)

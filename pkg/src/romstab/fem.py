"""Piecewise-linear finite elements for the 1-D coupled Burgers system.

Velocity ``w`` and temperature ``T`` live on the same equispaced grid on
[0, 1]::

    w_t + w w_x = mu w_xx - kappa T
    T_t + w T_x = c T_xx + f(t, x)

with ``w(0) = w_L``, ``w_x(1) = w_R``, ``T(0) = T_L``, ``T(1) = T_R``.
State vectors are full nodal vectors; Dirichlet entries carry the
boundary value and always receive a zero rate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .errors import DimensionMismatch, IntegrationFailure, InvalidGrid, NonFiniteState

Forcing = Callable[[float, np.ndarray], np.ndarray]

DEFAULT_RTOL = 1e-6
DEFAULT_ATOL = 1e-8
DEFAULT_SNAPSHOTS = 101


@dataclass(frozen=True)
class GridSpec:
    n_elements: int

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise InvalidGrid(f"need at least 2 elements, got {self.n_elements}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_elements

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h


@dataclass(frozen=True)
class PhysicalParams:
    mu: float
    kappa: float
    c: float
    forcing: Optional[Forcing] = None
    w_left: float = 0.0
    w_right: float = 0.0  # Neumann flux dw/dx at x = 1
    T_left: float = 0.0
    T_right: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")

    @classmethod
    def from_reynolds(cls, reynolds: float, **kwargs) -> "PhysicalParams":
        return cls(mu=1.0 / reynolds, **kwargs)

    def forcing_at(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.forcing is None:
            return np.zeros_like(x)
        return np.broadcast_to(np.asarray(self.forcing(t, x), dtype=float), x.shape)


@dataclass(frozen=True)
class StateField:
    w: np.ndarray
    T: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        T = np.asarray(self.T, dtype=float)
        if w.shape != T.shape or w.ndim != 1:
            raise DimensionMismatch(f"w{w.shape} and T{T.shape} must be equal 1-D shapes")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "T", T)

    def with_boundary(self, params: PhysicalParams) -> "StateField":
        """Copy with the Dirichlet values of ``params`` written in."""
        w = self.w.copy()
        T = self.T.copy()
        w[0] = params.w_left
        T[0] = params.T_left
        T[-1] = params.T_right
        return StateField(w, T, self.t)


@dataclass(frozen=True, eq=False)
class FemOperators:
    grid: GridSpec
    M: np.ndarray
    S: np.ndarray
    weights: np.ndarray
    w_free: np.ndarray
    T_free: np.ndarray
    neumann: np.ndarray
    _chol_w: tuple = field(repr=False)
    _chol_T: tuple = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.grid.n_nodes

    def solve_w(self, load: np.ndarray) -> np.ndarray:
        """Nodal velocity rate from a load vector; Dirichlet row left at zero."""
        rate = np.zeros(self.n_nodes)
        rate[self.w_free] = sla.cho_solve(self._chol_w, load[self.w_free])
        return rate

    def solve_T(self, load: np.ndarray) -> np.ndarray:
        rate = np.zeros(self.n_nodes)
        rate[self.T_free] = sla.cho_solve(self._chol_T, load[self.T_free])
        return rate

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(self.weights * u, v))


def trapezoid_weights(grid: GridSpec) -> np.ndarray:
    wts = np.full(grid.n_nodes, grid.h)
    wts[0] = wts[-1] = 0.5 * grid.h
    return wts


def assemble(grid: GridSpec, params: Optional[PhysicalParams] = None) -> FemOperators:
    """Consistent mass and stiffness matrices for linear hat functions.

    ``params`` is accepted for interface symmetry; the operators themselves
    do not depend on the physical coefficients.
    """
    if not isinstance(grid, GridSpec):
        grid = GridSpec(grid)
    n, h = grid.n_nodes, grid.h
    M = np.zeros((n, n))
    S = np.zeros((n, n))
    me = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    se = 1.0 / h * np.array([[1.0, -1.0], [-1.0, 1.0]])
    for e in range(grid.n_elements):
        idx = np.array([e, e + 1])
        M[np.ix_(idx, idx)] += me
        S[np.ix_(idx, idx)] += se

    w_free = np.arange(1, n)
    T_free = np.arange(1, n - 1)
    neumann = np.zeros(n)
    neumann[-1] = 1.0
    chol_w = sla.cho_factor(M[np.ix_(w_free, w_free)])
    chol_T = sla.cho_factor(M[np.ix_(T_free, T_free)])
    return FemOperators(
        grid=grid,
        M=M,
        S=S,
        weights=trapezoid_weights(grid),
        w_free=w_free,
        T_free=T_free,
        neumann=neumann,
        _chol_w=chol_w,
        _chol_T=chol_T,
    )


def convection_load(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Load vector of ``a * db/dx`` tested against the hat functions.

    Both factors are piecewise linear, so the element integrals are exact:
    on an element with end values (a0, a1), (b0, b1) the contributions are
    (b1 - b0)(2 a0 + a1)/6 and (b1 - b0)(a0 + 2 a1)/6.
    """
    db = b[1:] - b[:-1]
    load = np.zeros(a.shape[0])
    load[:-1] += db * (2.0 * a[:-1] + a[1:]) / 6.0
    load[1:] += db * (a[:-1] + 2.0 * a[1:]) / 6.0
    return load


def velocity_load(ops: FemOperators, params: PhysicalParams, w: np.ndarray, T: np.ndarray) -> np.ndarray:
    load = -params.mu * (ops.S @ w) - convection_load(w, w) - params.kappa * (ops.M @ T)
    load += params.mu * params.w_right * ops.neumann
    return load


def temperature_load(
    ops: FemOperators, params: PhysicalParams, w: np.ndarray, T: np.ndarray, t: float
) -> np.ndarray:
    load = -params.c * (ops.S @ T) - convection_load(w, T)
    if params.forcing is not None:
        load += ops.M @ params.forcing_at(t, ops.grid.nodes)
    return load


def rhs(ops: FemOperators, params: PhysicalParams, state: StateField) -> StateField:
    """Nodal time derivatives (dw/dt, dT/dt) of the semi-discrete system."""
    if state.w.shape[0] != ops.n_nodes:
        raise DimensionMismatch(
            f"state has {state.w.shape[0]} nodes, grid has {ops.n_nodes}"
        )
    wdot = ops.solve_w(velocity_load(ops, params, state.w, state.T))
    Tdot = ops.solve_T(temperature_load(ops, params, state.w, state.T, state.t))
    return StateField(wdot, Tdot, state.t)


@dataclass(frozen=True, eq=False)
class SnapshotSet:
    times: np.ndarray
    w: np.ndarray  # (s, n_nodes)
    T: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        if times.size == 0:
            raise ValueError("snapshot set is empty")
        if np.any(np.diff(times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")
        if w.shape != T.shape or w.shape[0] != times.size or w.shape[1] != len(self.x):
            raise DimensionMismatch(
                f"inconsistent shapes: times {times.shape}, w {w.shape}, T {T.shape}"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    @property
    def s(self) -> int:
        return self.times.size

    @property
    def w_mean(self) -> np.ndarray:
        return self.w.mean(axis=0)

    @property
    def T_mean(self) -> np.ndarray:
        return self.T.mean(axis=0)

    @property
    def states(self) -> list[StateField]:
        return [StateField(w, T, t) for t, w, T in zip(self.times, self.w, self.T)]

    def __len__(self) -> int:
        return self.s


def default_snapshot_times(t_f: float, count: int = DEFAULT_SNAPSHOTS) -> np.ndarray:
    return np.linspace(0.0, t_f, count)


def integrate(
    ops: FemOperators,
    params: PhysicalParams,
    initial: StateField,
    t_f: float,
    snapshot_times: Optional[Sequence[float]] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SnapshotSet:
    """Integrate the semi-discrete system with an adaptive RK 4(5) pair."""
    if not t_f > 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    if snapshot_times is None:
        snapshot_times = default_snapshot_times(t_f)
    times = np.asarray(snapshot_times, dtype=float)
    if times.min() < 0 or times.max() > t_f * (1 + 1e-12):
        raise ValueError("snapshot times must lie in [0, t_f]")
    n = ops.n_nodes
    if initial.w.shape[0] != n:
        raise DimensionMismatch(f"initial state has {initial.w.shape[0]} nodes, grid has {n}")

    def fun(t, y):
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(t)
        wdot = ops.solve_w(velocity_load(ops, params, y[:n], y[n:]))
        Tdot = ops.solve_T(temperature_load(ops, params, y[:n], y[n:], t))
        return np.concatenate([wdot, Tdot])

    y0 = np.concatenate([initial.w, initial.T])
    sol = solve_ivp(fun, (0.0, t_f), y0, method="RK45", t_eval=times, rtol=rtol, atol=atol)
    if sol.status == -1:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationFailure(sol.message, t_fail)
    Y = sol.y.T
    if not np.all(np.isfinite(Y)):
        raise NonFiniteState(float(sol.t[np.argmax(~np.isfinite(Y).all(axis=1))]))
    return SnapshotSet(times=sol.t, w=Y[:, :n], T=Y[:, n:], x=ops.grid.nodes)


def step_profile(x: np.ndarray, split: float = 0.5) -> np.ndarray:
    """1 on [0, split], 0 on (split, 1]."""
    return np.where(x <= split + 1e-12, 1.0, 0.0)


def step_initial_state(grid: GridSpec, params: PhysicalParams) -> StateField:
    """Velocity and temperature both start as the unit step on [0, 0.5].

    Dirichlet node values are overwritten by the boundary data, so with
    trivial boundary conditions the left node starts at zero.
    """
    x = grid.nodes
    return StateField(step_profile(x), step_profile(x), 0.0).with_boundary(params)

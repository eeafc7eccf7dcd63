"""Discrete dither-based extremum seeking and the trajectory-mismatch cost.

Per channel j the update driven by one scalar cost sample Q(k) is::

    y_j(k+1)      = y_j(k) + a_j t_f sin(w_j t_f k + pi/2) Q(k)
    mu_hat_j(k+1) = y_j(k+1) + a_j sin(w_j t_f k - pi/2)

with y_j(0) = 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EqualFrequencies, NonFiniteCost, RomstabError, TimeGridMismatch

log = logging.getLogger(__name__)

DIVERGED_COST = 1e12
HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class EsParams:
    a: tuple
    omega: tuple
    t_f: float = 1.0
    max_iters: int = 500
    literal_dual_phase: bool = False

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        omega = tuple(float(v) for v in np.atleast_1d(self.omega))
        if len(a) != len(omega) or not a:
            raise ValueError(f"need one amplitude per frequency, got a={a}, omega={omega}")
        if any(v < 0 for v in a):
            raise ValueError(f"dither amplitudes must be non-negative, got {a}")
        if any(not v > 0 for v in omega):
            raise ValueError(f"dither frequencies must be positive, got {omega}")
        if len(set(omega)) != len(omega):
            raise EqualFrequencies(f"channel frequencies must be distinct, got {omega}")
        if not self.t_f > 0:
            raise ValueError(f"t_f must be positive, got {self.t_f}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "omega", omega)

    @property
    def channels(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class EsRecord:
    k: int
    mu_hat: tuple
    Q: float


@dataclass(frozen=True)
class EsState:
    y: tuple
    mu_hat: tuple
    k: int = 0
    history: tuple = field(default=(), repr=False)

    @classmethod
    def initial(cls, channels: int = 1, mu_hat0: Optional[Sequence[float]] = None) -> "EsState":
        mu = (0.0,) * channels if mu_hat0 is None else tuple(float(v) for v in mu_hat0)
        if len(mu) != channels:
            raise ValueError(f"expected {channels} initial estimates, got {len(mu)}")
        return cls(y=(0.0,) * channels, mu_hat=mu, k=0)

    def record(self, Q_value: float) -> "EsState":
        """Append (k, mu_hat, Q) without advancing the recurrence."""
        return replace(self, history=self.history + (EsRecord(self.k, self.mu_hat, float(Q_value)),))


def _check_cost(Q_value) -> float:
    Q_value = float(Q_value)
    if not math.isfinite(Q_value):
        raise NonFiniteCost(f"cost sample is not finite: {Q_value}")
    return Q_value


def es_step(state: EsState, Q_value: float, params: EsParams) -> EsState:
    """One iteration of the discrete law for any number of channels."""
    Q_value = _check_cost(Q_value)
    if len(state.y) != params.channels:
        raise ValueError(f"state has {len(state.y)} channels, params have {params.channels}")
    k = state.k
    ys, mus = [], []
    for j, (y, a, w) in enumerate(zip(state.y, params.a, params.omega)):
        if params.literal_dual_phase and j == 1:
            # demodulation phase as printed for the second channel, using y_2(k)
            demod = math.sin(w * y + HALF_PI)
        else:
            demod = math.sin(w * params.t_f * k + HALF_PI)
        y_next = y + a * params.t_f * demod * Q_value
        ys.append(y_next)
        mus.append(y_next + a * math.sin(w * params.t_f * k - HALF_PI))
    history = state.history + (EsRecord(k, state.mu_hat, Q_value),)
    return EsState(tuple(ys), tuple(mus), k + 1, history)


def es_step_single(state: EsState, Q_value: float, params: EsParams) -> EsState:
    if params.channels != 1:
        raise ValueError("es_step_single needs single-channel parameters")
    return es_step(state, Q_value, params)


def es_step_dual(state: EsState, Q_value: float, params: EsParams) -> EsState:
    if params.channels != 2:
        raise ValueError("es_step_dual needs two-channel parameters")
    return es_step(state, Q_value, params)


class OracleFailure(RomstabError, RuntimeError):
    def __init__(self, k: int, mu_hat: tuple, cause: BaseException):
        super().__init__(f"cost oracle failed at iteration {k}, mu_hat={mu_hat}: {cause}")
        self.k = k
        self.mu_hat = mu_hat


def tune(
    cost_oracle: Callable[[tuple], float],
    params: EsParams,
    initial: Optional[EsState] = None,
    callback: Optional[Callable[[EsState], None]] = None,
) -> EsState:
    """Run ``params.max_iters`` ES iterations.

    The returned history holds ``max_iters + 1`` records: one per cost
    evaluation, the last at the final estimate.
    """
    state = EsState.initial(params.channels) if initial is None else initial

    def evaluate(st):
        try:
            return cost_oracle(st.mu_hat)
        except Exception as exc:
            raise OracleFailure(st.k, st.mu_hat, exc) from exc

    for _ in range(params.max_iters):
        state = es_step(state, evaluate(state), params)
        if callback is not None:
            callback(state)
    return state.record(_check_cost(evaluate(state)))


@dataclass(frozen=True)
class CostWeights:
    Q1: float = 1.0  # temperature
    Q2: float = 1.0  # velocity

    def __post_init__(self):
        if self.Q1 < 0 or self.Q2 < 0:
            raise ValueError(f"cost weights must be non-negative, got {self.Q1}, {self.Q2}")
        if self.Q1 == 0 and self.Q2 == 0:
            raise ValueError("cost weights cannot both be zero")


def squared_error_history(a, b, weights_x: np.ndarray) -> np.ndarray:
    """<e, e> at each time sample for stacked fields (s, n)."""
    e = np.asarray(a) - np.asarray(b)
    return (e * e) @ weights_x


def _trapezoid_weights_1d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    wts = np.zeros_like(x)
    if x.size > 1:
        dx = np.diff(x)
        wts[:-1] += 0.5 * dx
        wts[1:] += 0.5 * dx
    return wts


def error_integrals(truth, rom, weights_x: Optional[np.ndarray] = None) -> tuple[float, float]:
    """(int <e_T, e_T> dt, int <e_w, e_w> dt) by trapezoid in x and t."""
    times_a, times_b = np.asarray(truth.times), np.asarray(rom.times)
    if times_a.shape != times_b.shape or not np.allclose(times_a, times_b, rtol=0, atol=1e-12):
        raise TimeGridMismatch(
            f"trajectories sampled at different times ({times_a.size} vs {times_b.size} samples)"
        )
    if weights_x is None:
        weights_x = _trapezoid_weights_1d(truth.x)
    wt = _trapezoid_weights_1d(times_a)
    eT = squared_error_history(truth.T, rom.T, weights_x)
    ew = squared_error_history(truth.w, rom.w, weights_x)
    return float(wt @ eT), float(wt @ ew)


def learning_cost(truth, rom, weights: CostWeights = CostWeights(), weights_x: Optional[np.ndarray] = None) -> float:
    """Q = Q1 int <e_T, e_T> dt + Q2 int <e_w, e_w> dt; a diverged ROM maps to DIVERGED_COST."""
    if getattr(truth, "diverged", False) or getattr(rom, "diverged", False):
        return DIVERGED_COST
    eT, ew = error_integrals(truth, rom, weights_x)
    return weights.Q1 * eT + weights.Q2 * ew

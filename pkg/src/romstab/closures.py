"""Eddy-viscosity closure laws for the Galerkin ROM.

Linear closures replace the physical viscosity by a per-mode value
``mu_cl[i]``, i = 1..r:

=====  ==========================================================
H      mu + mu_e
R      mu + mu_e * i/r
RQ     mu + mu_e * (i/r)**2
RS     mu + mu_e * sqrt(i/r)
T      mu for i <= m, mu + mu_e for i > m
SK     mu + mu_e * exp(-(i-r)**2/(i-m)**2) for i <= m, mu for i > m
CLM    mu + mu_e * a0**-1.5 * (a1 + a2 * exp(-a3 * r/i))
=====  ==========================================================

The nonlinear closure NEV is an additive term
``mu_nl * sqrt(V(q)/V_inf) * diag(D) q`` with ``V(q) = |q|^2/2`` and
``V_inf = sum(lambda)/2``. ``"<linear>+NEV"`` combines the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EmptySpectrum, InvalidThreshold, NonPositiveGains

LINEAR_KINDS = ("none", "H", "R", "RQ", "RS", "T", "SK", "CLM")
SCOPES = ("velocity", "both")


def _parse_kind(kind: str) -> tuple[str, bool]:
    """Split a closure kind into (linear part, uses NEV)."""
    k = kind.strip()
    if k.lower() == "none":
        return "none", False
    parts = [p.strip().upper() for p in k.split("+")]
    nev = "NEV" in parts
    linear = [p for p in parts if p != "NEV"]
    if len(linear) > 1 or len(parts) - len(linear) > 1:
        raise ValueError(f"unknown closure kind {kind!r}")
    lin = linear[0] if linear else "none"
    if lin != "none" and lin not in LINEAR_KINDS:
        raise ValueError(f"unknown closure kind {kind!r}")
    return lin, nev


@dataclass(frozen=True)
class ClosureSpec:
    kind: str = "none"
    mu_e: float = 0.0
    mu_nl: float = 0.0
    m: Optional[int] = None
    alphas: Optional[Sequence[float]] = None
    scope: str = "velocity"

    def __post_init__(self):
        lin, _ = _parse_kind(self.kind)
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}, got {self.scope!r}")
        if lin in ("T", "SK") and self.m is None:
            raise InvalidThreshold(f"closure {lin} needs a mode threshold m")
        if lin == "CLM":
            if self.alphas is None or len(self.alphas) != 4:
                raise NonPositiveGains("CLM needs four gains (a0, a1, a2, a3)")
            if any(not a > 0 for a in self.alphas):
                raise NonPositiveGains(f"CLM gains must be positive, got {tuple(self.alphas)}")
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @property
    def linear_kind(self) -> str:
        return _parse_kind(self.kind)[0]

    @property
    def has_nev(self) -> bool:
        return _parse_kind(self.kind)[1]

    def with_gains(self, mu_e: Optional[float] = None, mu_nl: Optional[float] = None) -> "ClosureSpec":
        return ClosureSpec(
            self.kind,
            self.mu_e if mu_e is None else float(mu_e),
            self.mu_nl if mu_nl is None else float(mu_nl),
            self.m,
            self.alphas,
            self.scope,
        )


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    lambdas: np.ndarray
    d_diag: np.ndarray


def _sk_factor(i: np.ndarray, r: int, m: int) -> np.ndarray:
    out = np.zeros(i.shape)
    below = i < m
    out[below] = np.exp(-((i[below] - r) ** 2) / (i[below] - m) ** 2)
    # at i == m the exponent is -inf unless i == r too, where it is 0
    if m == r:
        out[i == m] = 1.0
    return out


def viscosity_profile(spec: ClosureSpec, mu: float, r: int) -> np.ndarray:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    kind = spec.linear_kind
    i = np.arange(1, r + 1, dtype=float)
    mu_e = spec.mu_e
    if kind in ("T", "SK") and not (1 <= spec.m <= r):
        raise InvalidThreshold(f"mode threshold m={spec.m} must satisfy 1 <= m <= r={r}")

    if kind == "none":
        shape = np.zeros(r)
        mu_e = 0.0
    elif kind == "H":
        shape = np.ones(r)
    elif kind == "R":
        shape = i / r
    elif kind == "RQ":
        shape = (i / r) ** 2
    elif kind == "RS":
        shape = np.sqrt(i / r)
    elif kind == "T":
        shape = (i > spec.m).astype(float)
    elif kind == "SK":
        shape = _sk_factor(i, r, spec.m)
    elif kind == "CLM":
        a0, a1, a2, a3 = spec.alphas
        shape = a0 ** -1.5 * (a1 + a2 * np.exp(-a3 * r / i))
    else:  # pragma: no cover - guarded by ClosureSpec
        raise ValueError(kind)
    if mu_e == 0.0:
        return np.full(r, float(mu))
    return mu + mu_e * shape


def nonlinear_penalty(mu_nl: float, q: np.ndarray, spectrum: ModeSpectrum) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    v_inf = 0.5 * float(np.sum(spectrum.lambdas))
    if not v_inf > 0:
        raise EmptySpectrum("reference energy V_inf is zero")
    v = 0.5 * float(np.dot(q, q))
    return mu_nl * np.sqrt(v / v_inf) * (spectrum.d_diag * q)


def rom_closure_terms(spec: ClosureSpec, tensors) -> tuple[np.ndarray, Optional[np.ndarray], Optional[Callable]]:
    """Per-mode viscosity, optional heat-row diffusivity, and NEV penalty for a ROM.

    Mode indices restart at 1 inside each field block.
    """
    rw, rT = tensors.r_w, tensors.r_T
    profile = np.full(tensors.r, tensors.mu)
    profile[:rw] = viscosity_profile(spec, tensors.mu, rw)
    heat_profile = None
    d_diag = tensors.d_diag
    if spec.scope == "both" and rT > 0:
        heat_profile = np.full(tensors.r, tensors.c)
        heat_profile[rw:] = viscosity_profile(spec, tensors.c, rT)
        d_diag = d_diag + np.diag(tensors.D_heat)
    penalty = None
    if spec.has_nev:
        spectrum = ModeSpectrum(tensors.lambdas, d_diag)
        mu_nl = spec.mu_nl

        def penalty(q):
            return nonlinear_penalty(mu_nl, q, spectrum)

    return profile, heat_profile, penalty

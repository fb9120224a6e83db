"""Problem parameters, critical constants and closed-form solutions/barriers.

Everything here is a pure function of its arguments.  Radii are passed as
``x_norm`` (the Euclidean norm |x|) so the same code serves every dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class UndefinedBarrierError(ValueError):
    """Raised when a barrier is requested outside its range of validity."""


@dataclass(frozen=True)
class ProblemParams:
    N: int
    q: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"dimension N must be a positive integer, got {self.N!r}")
        if not self.q > 1:
            raise ValueError(f"exponent q must satisfy q > 1, got {self.q!r}")


@dataclass(frozen=True)
class ExponentBundle:
    """Derived constants of a problem instance (N, q).

    ``gamma_q`` exists iff q < 2 and ``gamma_Nq`` iff q < 2 and
    (N = 1 or q < N/(N-1)); absent values are ``None``.
    """

    N: int
    q: float
    a: float
    q_star: float
    gamma_q: Optional[float]
    gamma_Nq: Optional[float]

    @property
    def subcritical(self) -> bool:
        return self.q < self.q_star


def critical_exponent(N: int) -> float:
    return (N + 2) / (N + 1)


def _pow(base: float, expo: float) -> float:
    try:
        return base ** expo
    except OverflowError:  # q very close to 1
        return math.inf


def derive_exponents(params: ProblemParams) -> ExponentBundle:
    N, q = params.N, params.q
    a = (2.0 - q) / (q - 1.0)
    gamma_q = gamma_Nq = None
    if q < 2:
        gamma_q = _pow(q - 1.0, -a) / (2.0 - q)
        if N == 1 or q < N / (N - 1.0):
            # balancing -f'' - (N-1)f'/s + |f'|^q for f = c s^{-a}
            gamma_Nq = _pow(a + 2.0 - N, 1.0 / (q - 1.0)) / a
    return ExponentBundle(N=N, q=q, a=a, q_star=critical_exponent(N),
                          gamma_q=gamma_q, gamma_Nq=gamma_Nq)


def gamma_barrier(s, bundle: ExponentBundle):
    """Radial supersolution gamma_q * s**(-a), valid for every N when q < 2."""
    if bundle.gamma_q is None:
        raise UndefinedBarrierError(f"gamma barrier needs q < 2 (q={bundle.q})")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("gamma barrier is defined for s > 0 only")
    out = bundle.gamma_q * s ** (-bundle.a)
    return out if out.ndim else float(out)


def gamma_stationary(s, params: ProblemParams, bundle: ExponentBundle):
    """Stationary singular solution gamma_{N,q} * s**(-a).

    gamma_{N,q} = a^{-1} (a+2-N)^{1/(q-1)}; for N = 1 it coincides with gamma_q.
    """
    if bundle.gamma_Nq is None:
        raise UndefinedBarrierError(
            f"no stationary singular solution for N={params.N}, q={params.q}: "
            "need q < 2 and (N = 1 or q < N/(N-1))")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("stationary solution is defined for s > 0 only")
    out = bundle.gamma_Nq * s ** (-bundle.a)
    return out if out.ndim else float(out)


def stationary_residual(f, df, d2f, s, N: int, q: float):
    """-f'' - (N-1)/s f' + |f'|^q for a radial profile given its derivatives."""
    return -d2f - (N - 1) / s * df + np.abs(df) ** q


def torsion_alpha(x_norm, s: float, N: int):
    """Torsion function of the ball B_s: -Δα = 1 inside, α = 0 on the sphere."""
    x_norm = np.asarray(x_norm, dtype=float)
    if np.any(x_norm < 0) or np.any(x_norm >= s):
        raise ValueError(f"torsion function needs 0 <= |x| < s = {s}")
    out = (s * s - x_norm * x_norm) / (2.0 * N)
    return out if out.ndim else float(out)


def barrier_w(x_norm, t, lam: float, s: float, c: float, N: int):
    """Exponential barrier lam * exp(c t + 1/α_s(x)), infinite on the sphere |x| = s."""
    alpha = torsion_alpha(x_norm, s, N)
    out = lam * np.exp(c * np.asarray(t, dtype=float) + 1.0 / np.asarray(alpha))
    return out if np.ndim(out) else float(out)


def barrier_w_rate(lam: float, s: float, N: int, q: float, safety: float = 1.1) -> float:
    """A time rate c that makes :func:`barrier_w` a supersolution.

    With φ = 1/α the barrier is w = lam e^{ct+φ}, and
    w_t - Δw + |∇w|^q = w (c - Δφ - |∇φ|^2) + w^q |∇φ|^q.
    Writing A = 1/α and r^2 = s^2 - 2N/A,

        Δφ + |∇φ|^2 = A^2 + 2 r^2 A^3 / N^2 + r^2 A^4 / N^2,
        w^{q-1} |∇φ|^q >= lam^{q-1} e^{(q-1)A} r^q A^{2q} / N^q   (c t >= 0),

    so any c >= sup_A [first - second] works.  The supremum is finite because
    the exponential wins as A -> infinity; it is located on a dense log grid
    in A and multiplied by ``safety``.
    """
    A_min = 2.0 * N / (s * s)
    A = A_min * np.geomspace(1.0, 1e6, 20001)
    r2 = np.clip(s * s - 2.0 * N / A, 0.0, None)
    pos = A**2 + 2.0 * r2 * A**3 / N**2 + r2 * A**4 / N**2
    with np.errstate(over="ignore"):
        log_neg = ((q - 1.0) * (math.log(lam) + A) + 0.5 * q * np.log(np.maximum(r2, 1e-300))
                   + 2.0 * q * np.log(A) - q * math.log(N))
        neg = np.exp(np.minimum(log_neg, 700.0))
    sup = float(np.max(pos - neg))
    return safety * max(sup, 0.0) + 1e-12


def barrier_J(t, q: float, k_const: float, K_const: float, A_const: float):
    """J(t) = C (arctan t)^{-1/(q-1)} with C^{q-1} = k^{-q} (K π/2 + A/(q-1)).

    k, K, A are the geometry constants of the distance-like functions of the
    domain; they are inputs, not computed here.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("barrier_J is defined for t > 0")
    C = (k_const ** (-q) * (K_const * math.pi / 2 + A_const / (q - 1.0))) ** (1.0 / (q - 1.0))
    out = C * np.arctan(t) ** (-1.0 / (q - 1.0))
    return out if out.ndim else float(out)


def cole_hopf(u):
    """z = 1 - exp(-u); maps solutions for q = 2 onto the heat equation."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("cole_hopf expects u >= 0")
    out = -np.expm1(-u)
    return out if out.ndim else float(out)


def inverse_cole_hopf(z):
    z = np.asarray(z, dtype=float)
    if np.any(z >= 1) or np.any(z < 0):
        raise ValueError("inverse_cole_hopf expects 0 <= z < 1")
    out = -np.log1p(-z)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GaussianInitialData:
    """z0(x) = z0_peak * exp(-|x|^2 / variance4), i.e. u0 = -ln(1 - z0)."""

    z0_peak: float
    variance4: float

    def __post_init__(self):
        if not 0 < self.z0_peak < 1:
            raise ValueError("z0_peak must lie in (0, 1)")
        if not self.variance4 > 0:
            raise ValueError("variance4 must be positive")


def exact_q2_solution(data: GaussianInitialData, x_norm, t, N: int):
    """Exact solution for q = 2 from the heat evolution of a Gaussian z0."""
    x_norm = np.asarray(x_norm, dtype=float)
    t = np.asarray(t, dtype=float)
    width = data.variance4 + 4.0 * t
    z = data.z0_peak * (data.variance4 / width) ** (N / 2.0) * np.exp(-x_norm**2 / width)
    out = -np.log1p(-z)
    return out if out.ndim else float(out)

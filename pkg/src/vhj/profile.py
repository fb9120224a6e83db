"""Self-similar very singular profiles by shooting.

With Y(x, t) = t^{-a/2} f(|x| t^{-1/2}) and a = (2-q)/(q-1), the equation
becomes the profile ODE

    f'' + ((N-1)/η + η/2) f' + (a/2) f - |f'|^q = 0,   f(0) = f0, f'(0) = 0.

The powers of t balance exactly because q(a+1) = a+2.  Shots either cross
zero, keep a slow tail ~ η^{-a}, or (at one f0) decay like η^{a-N} e^{-η²/4}.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.interpolate import CubicHermiteSpline

from .grid import Field, RadialGrid, sphere_area
from .params import ExponentBundle, ProblemParams, derive_exponents

ETA0 = 1e-3
FAST_THRESHOLD = 1e-6
# Log-slope of η^a f at the end of the range that still counts as a plateau.
# Slow tails carry O(η^-2) corrections (log-slopes up to ~2 at η = 20 for
# q near 1); Gaussian tails have log-slopes near -η²/2 = -200 there.
SLOW_SLOPE_TOL = 5.0


class TailClass(str, Enum):
    HITS_ZERO = "HitsZero"
    SLOW_DECAY = "SlowDecay"
    FAST_DECAY = "FastDecay"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ProfileODE:
    N: int
    q: float
    a: float

    def __post_init__(self):
        if not self.q < 2:
            raise ValueError("self-similar profiles need q < 2 (a > 0)")
        if abs(self.q * (self.a + 1.0) - (self.a + 2.0)) > 1e-12 * (self.a + 2.0):
            raise ValueError("exponent a is inconsistent with q: q(a+1) != a+2")

    @classmethod
    def from_params(cls, N: int, q: float) -> "ProfileODE":
        b = derive_exponents(ProblemParams(N, q))
        return cls(N, q, b.a)

    def rhs(self, eta, y):
        f, g = y
        return [g, -((self.N - 1) / eta + 0.5 * eta) * g - 0.5 * self.a * f + abs(g) ** self.q]

    def residual(self, eta, f, fp, fpp):
        return fpp + ((self.N - 1) / eta + 0.5 * eta) * fp + 0.5 * self.a * f - np.abs(fp) ** self.q

    def seed(self, f0: float, eta0: float = ETA0):
        """Regular Taylor start: f''(0) = -a f0 / (2N) removes the axis singularity."""
        c = -self.a * f0 / (2.0 * self.N)
        return f0 + 0.5 * c * eta0**2, c * eta0


@dataclass
class ShotResult:
    f0: float
    classification: TailClass
    eta: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    crosses_zero: bool
    eta_zero: Optional[float]
    eta_cut: Optional[float]
    slow_limit: float
    fast_limit: float
    tail_slope: float

    @property
    def positive_side(self) -> bool:
        return not self.crosses_zero


def _rescaled(eta, f, a):
    return eta**a * f


def classify_tail(eta, f, a: float, f0: float, N: int | None = None) -> TailClass:
    """Classify a sampled profile by its behaviour at large η.

    HitsZero: f crosses zero before η^a f has dropped below 1e-6 f0.
    FastDecay: f stays positive while η^a f decreases monotonically (over the
    tail) below 1e-6 f0; anything after that point is treated as rounding noise.
    SlowDecay: f stays positive, η^a f stays above the threshold and its
    log-slope at the end of the range is small (a plateau).
    """
    return _classify(np.asarray(eta, float), np.asarray(f, float), a, f0)[0]


def _classify(eta, f, a, f0):
    g = _rescaled(eta, f, a)
    thr = FAST_THRESHOLD * f0
    below = np.nonzero((g < thr) & (eta >= 1.0))[0]
    neg = np.nonzero(f <= 0)[0]
    first_below = below[0] if below.size else None
    first_neg = neg[0] if neg.size else None
    if first_below is not None and (first_neg is None or first_below < first_neg):
        if first_neg is not None and first_neg == first_below:
            return TailClass.HITS_ZERO, None
        # monotone decrease over the tail leading to the threshold
        start = int(np.argmax(g[:first_below + 1]))
        seg = g[start:first_below + 1]
        if np.all(np.diff(seg) <= 1e-12 * f0):
            return TailClass.FAST_DECAY, first_below
        return TailClass.INCONCLUSIVE, first_below
    if first_neg is not None:
        return TailClass.HITS_ZERO, None
    if eta.size >= 3 and g[-1] > 0:
        k = max(1, eta.size // 20)
        slope = (math.log(g[-1]) - math.log(g[-1 - k])) / (math.log(eta[-1]) - math.log(eta[-1 - k]))
        if abs(slope) < SLOW_SLOPE_TOL:
            return TailClass.SLOW_DECAY, None
    return TailClass.INCONCLUSIVE, None


def integrate_profile(ode: ProfileODE, f0: float, eta_max: float = 20.0, tol: float = 1e-10,
                      n_samples: int = 20001) -> ShotResult:
    """Shoot from the axis with f(0) = f0 and classify the tail."""
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    if eta_max < 20:
        raise ValueError("eta_max must be at least 20")

    def hit(eta, y):
        return y[0]
    hit.terminal = True
    hit.direction = -1

    y0 = ode.seed(f0)
    sol = solve_ivp(ode.rhs, (ETA0, eta_max), y0, method="DOP853", rtol=tol,
                    atol=1e-300, events=hit, dense_output=True)
    crosses = bool(sol.t_events[0].size)
    eta_end = float(sol.t_events[0][0]) if crosses else float(sol.t[-1])
    if sol.status == -1:
        eta_end = float(sol.t[-1])
    eta = np.concatenate([[0.0], np.linspace(ETA0, eta_end, n_samples)])
    y = sol.sol(eta[1:])
    f = np.concatenate([[f0], y[0]])
    fp = np.concatenate([[0.0], y[1]])
    if crosses:
        f[-1] = 0.0
    cls, cut = _classify(eta, f, ode.a, f0)
    if sol.status == -1 and cls != TailClass.HITS_ZERO:
        cls = TailClass.INCONCLUSIVE

    g = _rescaled(eta, f, ode.a)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        gauss = eta ** (ode.N - ode.a) * np.exp(eta**2 / 4) * f
    tail = slice(max(1, int(0.9 * eta.size)), None)
    k = max(1, eta.size // 20)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (math.log(g[-1]) - math.log(g[-1 - k])) / (math.log(eta[-1]) - math.log(eta[-1 - k])) \
            if g[-1] > 0 and g[-1 - k] > 0 else float("nan")
    if cut is not None:
        fast_window = slice(max(1, cut // 2), cut + 1)
        fast_limit = float(gauss[fast_window][-1])
    else:
        fast_limit = float(gauss[-1])
    return ShotResult(f0=f0, classification=cls, eta=eta, f=f, fp=fp, crosses_zero=crosses,
                      eta_zero=eta_end if crosses else None,
                      eta_cut=float(eta[cut]) if cut is not None else None,
                      slow_limit=float(np.mean(g[tail])), fast_limit=fast_limit,
                      tail_slope=slope)


@dataclass
class ProfileSolution:
    N: int
    q: float
    a: float
    f0_star: float
    eta: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def eta_max(self) -> float:
        return float(self.eta[-1])

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.eta, self.f, self.fp)

    def __call__(self, eta):
        """f(η), extended by zero beyond the sampled range."""
        eta = np.asarray(eta, dtype=float)
        out = np.where(eta <= self.eta_max, self._spline(np.minimum(eta, self.eta_max)), 0.0)
        return out if out.ndim else float(out)

    def write(self, csv_path, json_path=None) -> None:
        with Path(csv_path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eta", "f", "fprime"])
            for row in zip(self.eta, self.f, self.fp):
                w.writerow([repr(float(x)) for x in row])
        if json_path is not None:
            header = {"f0_star": self.f0_star, "N": self.N, "q": self.q, "a": self.a,
                      "classification": TailClass.FAST_DECAY.value, **self.diagnostics}
            Path(json_path).write_text(json.dumps(header, indent=2, sort_keys=True))


@dataclass
class NoFastDecayProfile:
    """Outcome of a scan that found no zero-crossing / slow-tail transition."""

    N: int
    q: float
    scan: list

    def __bool__(self):
        return False


def scan_f0(ode: ProfileODE, f0_values, eta_max=20.0, tol=1e-10):
    return [integrate_profile(ode, float(f0), eta_max, tol) for f0 in f0_values]


def _scan_table(shots):
    return [{"f0": s.f0, "classification": s.classification.value,
             "crosses_zero": s.crosses_zero} for s in shots]


def shoot_vss(bundle: ExponentBundle, N: int | None = None, q: float | None = None,
              bisect_tol: float = 1e-10, tol: float = 1e-10, eta_max: float = 20.0,
              f0_range=(1e-3, 1e3), points_per_decade: int = 2, extend_to: float = 1e12,
              extend_down_to: float = 1e-12):
    """Bracket and bisect f0 for the fast-decaying profile.

    The scan orientation (which end crosses zero) is detected at runtime.  If
    every scanned shot crosses zero the scan is extended by decades up to
    ``extend_to``; if none does, it is extended down to ``extend_down_to``
    (near q* the fast-decay height becomes very small).  Returns a
    :class:`ProfileSolution` or a :class:`NoFastDecayProfile`.
    """
    N = bundle.N if N is None else N
    q = bundle.q if q is None else q
    ode = ProfileODE(N, q, bundle.a)
    lo, hi = f0_range
    decades = math.log10(hi / lo)
    grid = np.logspace(math.log10(lo), math.log10(hi), int(round(decades * points_per_decade)) + 1)
    shots = scan_f0(ode, grid, eta_max, tol)
    while all(s.crosses_zero for s in shots) and shots[-1].f0 < extend_to:
        extra = shots[-1].f0 * np.array([(10 ** (1.0 / points_per_decade)) ** j
                                         for j in range(1, points_per_decade + 1)])
        shots += scan_f0(ode, extra, eta_max, tol)
    while not any(s.crosses_zero for s in shots) and shots[0].f0 > extend_down_to:
        extra = shots[0].f0 * np.array([(10 ** (-1.0 / points_per_decade)) ** j
                                        for j in range(points_per_decade, 0, -1)])
        shots = scan_f0(ode, extra, eta_max, tol) + shots

    brackets = [(a_, b_) for a_, b_ in zip(shots, shots[1:]) if a_.crosses_zero != b_.crosses_zero]
    if not brackets:
        return NoFastDecayProfile(N, q, _scan_table(shots))

    candidates = []
    for left, right in brackets:
        zero_side, pos_side = (left, right) if left.crosses_zero else (right, left)
        a_, b_ = zero_side.f0, pos_side.f0
        best = None
        while abs(b_ - a_) > bisect_tol * max(abs(a_), abs(b_)):
            mid = 0.5 * (a_ + b_)
            shot = integrate_profile(ode, mid, eta_max, tol)
            if shot.classification == TailClass.FAST_DECAY:
                best = shot
            if shot.crosses_zero:
                a_ = mid
            else:
                b_ = mid
        if best is not None:
            candidates.append((best, a_, b_))
    if not candidates:
        return NoFastDecayProfile(N, q, _scan_table(shots))

    # several transitions: keep the one whose profile respects the Γ bound
    chosen = None
    for best, a_, b_ in candidates:
        sol = _to_solution(best, bundle, a_, b_, shots, len(brackets))
        if sol.diagnostics["gamma_bound_ok"]:
            chosen = sol
            break
    return chosen if chosen is not None else _to_solution(*candidates[0][:1], bundle,
                                                          candidates[0][1], candidates[0][2],
                                                          shots, len(brackets))


def _to_solution(shot: ShotResult, bundle: ExponentBundle, a_, b_, shots, n_brackets):
    cut = int(np.searchsorted(shot.eta, shot.eta_cut)) + 1
    eta, f, fp = shot.eta[:cut], shot.f[:cut], shot.fp[:cut]
    orientation = "zero-below" if shots[0].crosses_zero else "zero-above"
    mask = eta >= 0.5
    ok = True
    if bundle.gamma_q is not None and mask.any():
        ok = bool(np.all(f[mask] <= bundle.gamma_q * eta[mask] ** (-bundle.a) * (1 + 1e-6)))
    diag = {"bracket": [a_, b_], "eta_cut": shot.eta_cut, "fast_limit": shot.fast_limit,
            "orientation": orientation, "n_transitions": n_brackets,
            "gamma_bound_ok": ok, "scan": _scan_table(shots)}
    return ProfileSolution(bundle.N, bundle.q, bundle.a, shot.f0, eta, f, fp, diag)


def profile_to_field(p: ProfileSolution, t: float, grid: RadialGrid,
                     bundle: ExponentBundle | None = None) -> Field:
    """Sample Y(r, t) = t^{-a/2} f(r t^{-1/2}) on the grid."""
    if not t > 0:
        raise ValueError("t must be positive")
    a = p.a if bundle is None else bundle.a
    return Field(grid, t ** (-a / 2.0) * p(grid.r / math.sqrt(t)))


def profile_mass(p: ProfileSolution, t: float) -> float:
    """∫ Y(x, t) dx = t^{(N-a)/2} ω_{N-1} ∫ f(η) η^{N-1} dη."""
    integrand = p.f * p.eta ** (p.N - 1)
    return t ** ((p.N - p.a) / 2.0) * sphere_area(p.N) * float(trapezoid(integrand, p.eta))

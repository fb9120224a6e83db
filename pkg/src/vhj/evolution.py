"""IMEX time stepping for u_t - Δu + |∇u|^q = 0 on a radial grid.

Diffusion is backward Euler (tridiagonal M-matrix solve), the gradient
absorption is the explicit Godunov Hamiltonian.  Under ``dt_limit`` the whole
update is monotone, so ordered data stay ordered (discrete comparison).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.linalg.lapack import dgtsv

from .grid import (Field, RadialGrid, apply_laplacian,
                   laplacian_coefficients, mass, one_sided_gradients,
                   quadrature_weights)
from .params import GaussianInitialData


class ResolutionError(ValueError):
    """Initial data too narrow for the grid (support radius < 4h)."""


class MaxStepsExceeded(RuntimeError):
    pass


class ScheduleExhausted(RuntimeError):
    """The cap schedule of :func:`large_solution` did not saturate."""

    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


# -- initial data -----------------------------------------------------------

@dataclass(frozen=True)
class MollifiedDirac:
    k: float
    eps: float


@dataclass(frozen=True)
class Plateau:
    M: float
    eta: float


@dataclass(frozen=True)
class GaussianCH:
    data: GaussianInitialData


@dataclass(frozen=True)
class Explicit:
    field: Field


InitialDataSpec = Union[MollifiedDirac, Plateau, GaussianCH, Explicit]


def bump(r: np.ndarray, eps: float) -> np.ndarray:
    """exp(-1/(1-(r/eps)^2)) inside the ball of radius eps, zero outside."""
    s = np.asarray(r, dtype=float) / eps
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def make_initial_data(spec: InitialDataSpec, grid: RadialGrid, N: int) -> Field:
    r, h = grid.r, grid.h
    if isinstance(spec, MollifiedDirac):
        if spec.eps < 4 * h * (1 - 1e-12):
            raise ResolutionError(f"eps={spec.eps} below 4h={4 * h}")
        if spec.k == 0:
            return Field(grid, np.zeros_like(r))
        b = bump(r, spec.eps)
        # discrete normalization: mass(u) == k up to rounding
        return Field(grid, spec.k * b / mass(Field(grid, b), N))
    if isinstance(spec, Plateau):
        if spec.eta < 4 * h * (1 - 1e-12):
            raise ResolutionError(f"eta={spec.eta} below 4h={4 * h}")
        if not math.isfinite(spec.M) or spec.M <= 0:
            raise ValueError("plateau height must be finite and positive")
        edge = spec.eta - h
        ramp = 0.5 * (1.0 + np.cos(np.pi * np.clip((r - edge) / h, 0.0, 1.0)))
        return Field(grid, spec.M * np.where(r >= spec.eta, 0.0, ramp))
    if isinstance(spec, GaussianCH):
        d = spec.data
        return Field(grid, -np.log1p(-d.z0_peak * np.exp(-r**2 / d.variance4)))
    if isinstance(spec, Explicit):
        if spec.field.grid != grid:
            raise ValueError("explicit field lives on a different grid")
        return spec.field.copy()
    raise TypeError(f"unknown initial data {spec!r}")


def describe_data(spec: InitialDataSpec) -> dict:
    if isinstance(spec, GaussianCH):
        return {"kind": "gaussian", **asdict(spec.data)}
    if isinstance(spec, Explicit):
        return {"kind": "explicit"}
    return {"kind": type(spec).__name__.lower(), **asdict(spec)}


# -- boundary conditions ----------------------------------------------------

@dataclass(frozen=True)
class DirichletZero:
    def value(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class DirichletValue:
    g: Callable[[float], float]

    def value(self, t: float) -> float:
        return float(self.g(t))


BoundaryCondition = Union[DirichletZero, DirichletValue]


# -- stepping ---------------------------------------------------------------

@dataclass
class StepperConfig:
    t_end: float
    safety: float = 0.5
    max_steps: int = 1_000_000
    snapshot_times: Sequence[float] = ()
    nonneg_clip: bool = False
    dt_min: float = 0.0
    dt_max: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        st = list(self.snapshot_times)
        if st != sorted(st):
            raise ValueError("snapshot_times must be sorted")
        self.snapshot_times = tuple(float(s) for s in st)


def max_slope(f: Field) -> float:
    p_minus, p_plus = one_sided_gradients(f)
    return float(max(np.max(np.abs(p_minus)), np.max(np.abs(p_plus))))


def dt_limit(f: Field, q: float, grid: RadialGrid | None = None, safety: float = 0.5,
             dt_min: float = 0.0, dt_max: float | None = None) -> float:
    """safety * h / (q P^{q-1}) with P the largest one-sided slope, capped at h."""
    grid = grid or f.grid
    return _dt_from_slope(max_slope(f), q, grid.h, safety, dt_min, dt_max)


def _dt_from_slope(P: float, q: float, h: float, safety: float, dt_min: float,
                   dt_max: float | None) -> float:
    cap = h if dt_max is None else dt_max
    if P == 0.0:
        return cap
    dt = safety * h / (q * P ** (q - 1.0))
    return float(min(max(dt, dt_min), cap))


def _tridiagonal(grid: RadialGrid, N: int, dt: float):
    """Sub-, main and super-diagonal of I - dt L with the boundary row u_n = g."""
    lower, diag, upper = laplacian_coefficients(grid, N)
    dl = -dt * lower[1:]
    d = 1.0 - dt * diag
    du = -dt * upper[:-1]
    d[-1] = 1.0
    dl[-1] = 0.0
    return dl, d, du


def _hamiltonian_from_diff(dif: np.ndarray, q: float) -> np.ndarray:
    """Godunov H from forward differences; same values as godunov_hamiltonian."""
    pos = np.maximum(dif, 0.0)
    neg = np.maximum(-dif, 0.0)
    a = np.empty(dif.size + 1)
    b = np.empty(dif.size + 1)
    a[1:] = pos          # (p_minus)^+
    a[0] = neg[0]        # axis reflection p_minus = -p_plus
    b[:-1] = neg         # (-p_plus)^+
    b[-1] = neg[-1]
    np.maximum(a, b, out=a)
    return a ** q


def _hamiltonian(u: np.ndarray, grid: RadialGrid, q: float) -> np.ndarray:
    return _hamiltonian_from_diff(np.diff(u) / grid.h, q)


def _solve(grid: RadialGrid, N: int, dt: float, rhs: np.ndarray) -> np.ndarray:
    dl, d, du = _tridiagonal(grid, N, dt)
    *_, x, info = dgtsv(dl, d, du, rhs, overwrite_dl=1, overwrite_d=1, overwrite_du=1,
                        overwrite_b=1)
    if info != 0:  # cannot happen for an M-matrix
        raise RuntimeError(f"tridiagonal solve failed (info={info})")
    return x


def imex_update(u: np.ndarray, grid: RadialGrid, dt: float, q: float, N: int,
                boundary_value: float):
    """One step on raw arrays; returns (u_new, hamiltonian_of_u_old)."""
    H = _hamiltonian(u, grid, q)
    rhs = u - dt * H
    rhs[-1] = boundary_value
    return _solve(grid, N, dt, rhs), H


def step(f: Field, dt: float, q: float, N: int, bc: BoundaryCondition = DirichletZero(),
         t_new: float = 0.0) -> Field:
    """Solve (I - dt L) u_new = u_old - dt H(u_old), boundary row u_n = bc(t_new)."""
    u_new, _ = imex_update(f.values.copy(), f.grid, dt, q, N, bc.value(t_new))
    return Field(f.grid, u_new)


# -- trajectories -----------------------------------------------------------

@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    sup: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    grad_sup: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)
    outflux: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    snapshots: dict = field(default_factory=dict)
    final: Optional[Field] = None
    steps: int = 0

    def balance_residual(self) -> float:
        """Relative defect of mass(0) - mass(t) - dissipation(t) - outflux(t)."""
        m0 = self.mass[0]
        defect = m0 - self.mass[-1] - self.dissipation[-1] - self.outflux[-1]
        return abs(defect) / abs(m0) if m0 else abs(defect)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "sup", "mass", "grad_sup", "dissipation"])
            for row in zip(self.times, self.sup, self.mass, self.grad_sup, self.dissipation):
                w.writerow([repr(float(x)) for x in row])

    def snapshot(self, t: float) -> Field:
        key = min(self.snapshots, key=lambda s: abs(s - t))
        if abs(key - t) > 1e-12 * max(1.0, t):
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[key]


Observer = Callable[[float, Field], float]


def evolve(f0: Field, config: StepperConfig, q: float, N: int,
           bc: BoundaryCondition = DirichletZero(),
           observers: Mapping[str, Observer] | None = None) -> Trajectory:
    """Run to ``config.t_end`` with adaptive dt, landing exactly on snapshots."""
    return evolve_lockstep([f0], config, q, N, bc, observers)[0]


def evolve_lockstep(fields: Sequence[Field], config: StepperConfig, q: float, N: int,
                    bc: BoundaryCondition = DirichletZero(),
                    observers: Mapping[str, Observer] | None = None,
                    monitor: Callable[[float, Sequence[np.ndarray]], None] | None = None) -> list:
    """Evolve several fields on one shared dt sequence.

    The step size is the smallest ``dt_limit`` over all fields, so ordered
    initial data stay ordered node by node (discrete comparison).  ``monitor``
    is called as ``monitor(t, arrays)`` after every step, and once at t = 0.
    """
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ValueError("lockstep evolution needs a common grid")
    W = quadrature_weights(grid, N)
    observers = dict(observers or {})
    trajs = [Trajectory(extra={name: [] for name in observers}) for _ in fields]
    us = [f.values.copy() for f in fields]
    slopes = [0.0] * len(fields)
    diss = [0.0] * len(fields)
    out = [0.0] * len(fields)
    t = 0.0
    steps = 0

    diffs = [None] * len(fields)

    def record(j, t):
        traj, u = trajs[j], us[j]
        traj.times.append(t)
        traj.sup.append(float(np.max(np.abs(u))))
        traj.mass.append(float(W @ u))
        # forward differences feed both the slope bound and the next Hamiltonian
        diffs[j] = np.diff(u) / grid.h
        slopes[j] = float(np.max(np.abs(diffs[j])))
        traj.grad_sup.append(slopes[j])
        traj.dissipation.append(diss[j])
        traj.outflux.append(out[j])
        if observers:
            fld = Field(grid, u)
            for name, obs in observers.items():
                traj.extra[name].append(float(obs(t, fld)))

    stops = sorted(set(s for s in config.snapshot_times if 0 < s < config.t_end) | {config.t_end})
    for j in range(len(fields)):
        record(j, t)
        if 0.0 in config.snapshot_times:
            trajs[j].snapshots[0.0] = Field(grid, us[j].copy())
    if monitor is not None:
        monitor(t, us)
    for stop in stops:
        while t < stop:
            if steps >= config.max_steps:
                raise MaxStepsExceeded(f"max_steps={config.max_steps} reached at t={t}")
            dt = min(_dt_from_slope(P, q, grid.h, config.safety, config.dt_min, config.dt_max)
                     for P in slopes)
            last = t + dt >= stop - 1e-12 * max(stop, 1.0)
            if last:
                dt = stop - t
            t_new = stop if last else t + dt
            g = bc.value(t_new)
            # one banded solve with a right-hand side per field (shared matrix)
            Hs = [_hamiltonian_from_diff(dif, q) for dif in diffs]
            rhs = np.empty((grid.n + 1, len(us)), order="F")
            for j, (u, H) in enumerate(zip(us, Hs)):
                np.multiply(H, -dt, out=rhs[:, j])
                rhs[:, j] += u
            rhs[-1, :] = g
            sol = _solve(grid, N, dt, rhs)
            for j, u in enumerate(us):
                u_new, H = np.ascontiguousarray(sol[:, j]), Hs[j]
                diss[j] += dt * float(W[:-1] @ H[:-1])
                # conservative form of the diffusion solve; for N = 1 this is
                # exactly the boundary flux 2 dt (u_{n-1} - u_n) / h
                out[j] += (-dt * float(W[:-1] @ apply_laplacian(u_new, grid, N)[:-1])
                           - W[-1] * (u_new[-1] - u[-1]))
                if config.nonneg_clip:
                    np.maximum(u_new, 0.0, out=u_new)
                us[j] = u_new
            t = t_new
            steps += 1
            for j in range(len(fields)):
                trajs[j].steps = steps
                record(j, t)
            if monitor is not None:
                monitor(t, us)
        if stop in config.snapshot_times:
            for j in range(len(fields)):
                trajs[j].snapshots[stop] = Field(grid, us[j].copy())
    for j in range(len(fields)):
        trajs[j].final = Field(grid, us[j])
    return trajs


def run_manifest(grid: RadialGrid, q: float, N: int, config: StepperConfig,
                 data: InitialDataSpec, bc: BoundaryCondition = DirichletZero()) -> dict:
    return {
        "grid": {"R": grid.R, "n": grid.n},
        "q": q,
        "N": N,
        "dt_policy": {"safety": config.safety, "dt_min": config.dt_min,
                      "dt_max": grid.h if config.dt_max is None else config.dt_max},
        "t_end": config.t_end,
        "snapshot_times": list(config.snapshot_times),
        "bc": "dirichlet-zero" if isinstance(bc, DirichletZero) else "dirichlet-value",
        "data": describe_data(data),
    }


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True))


# -- large solutions --------------------------------------------------------

@dataclass
class LargeSolution:
    field: Field
    M: float
    table: list


def large_solution(eta: float, grid: RadialGrid, q: float, N: int,
                   bc: BoundaryCondition = DirichletZero(),
                   cap_schedule: Sequence[float] = (10.0, 100.0, 1000.0),
                   t_probe: float = 0.1, tol: float = 1e-3,
                   safety: float = 0.5) -> LargeSolution:
    """Field at ``t_probe`` of the solution with infinite data on B_eta.

    Infinite data are realized by plateaus of increasing height M; the first
    pair of successive caps whose fields differ by less than ``tol`` in sup
    norm ends the schedule, and the field of the larger cap is returned.
    """
    caps = list(cap_schedule)
    if caps != sorted(caps) or len(set(caps)) != len(caps):
        raise ValueError("cap_schedule must be strictly increasing")
    config = StepperConfig(t_end=t_probe, safety=safety)
    finals = []
    table = []
    for M in caps:
        f0 = make_initial_data(Plateau(M, eta), grid, N)
        finals.append(evolve(f0, config, q, N, bc).final.values)
        idx, table = select_cap(caps[:len(finals)], finals, tol)
        if idx is not None:
            return LargeSolution(Field(grid, finals[idx]), caps[idx], table)
    raise ScheduleExhausted(f"cap schedule {caps} did not saturate to tol={tol}", table)


def select_cap(caps: Sequence[float], finals: Sequence[np.ndarray], tol: float):
    """Stopping rule of :func:`large_solution` applied to precomputed fields.

    Returns ``(index, table)``; ``index`` is the first cap whose field is
    within ``tol`` of its predecessor's, or None.
    """
    table = []
    for i, (M, cur) in enumerate(zip(caps, finals)):
        row = {"M": M, "sup": float(np.max(cur))}
        if i > 0:
            row["diff"] = float(np.max(np.abs(cur - finals[i - 1])))
        table.append(row)
        if i > 0 and row["diff"] < tol:
            return i, table
    return None, table

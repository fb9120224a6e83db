"""Uniform radial mesh, nodal fields and the discrete spatial operators.

Nodes are r_i = i h, i = 0..n.  The axis r = 0 is handled by even reflection
(ghost value u_{-1} = u_1); the last node carries the boundary value.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    R: float
    n: int

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("outer radius R must be positive")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError("need at least 8 cells")

    @property
    def h(self) -> float:
        return self.R / self.n

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    def __len__(self):
        return self.n + 1


@dataclass
class Field:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} nodal values, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f, dtype=float)


def sphere_area(N: int) -> float:
    """Area of the unit sphere in R^N; 2 for N = 1 (the two endpoints)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@functools.lru_cache(maxsize=64)
def laplacian_coefficients(grid: RadialGrid, N: int):
    """Stencil weights (lower, diag, upper) of the radial Laplacian per node.

    The last row is zero; the boundary node is owned by the boundary condition.
    The arrays are cached per (grid, N) and read-only.
    """
    n, h = grid.n, grid.h
    i = np.arange(n + 1, dtype=float)
    lower = np.zeros(n + 1)
    upper = np.zeros(n + 1)
    diag = np.zeros(n + 1)
    inner = slice(1, n)
    lower[inner] = (1.0 - (N - 1) / (2.0 * i[inner])) / h**2
    upper[inner] = (1.0 + (N - 1) / (2.0 * i[inner])) / h**2
    diag[inner] = -2.0 / h**2
    # axis: Δu -> N u''(0) with u_{-1} = u_1
    diag[0] = -2.0 * N / h**2
    upper[0] = 2.0 * N / h**2
    for a in (lower, diag, upper):
        a.flags.writeable = False
    return lower, diag, upper


def apply_laplacian(u: np.ndarray, grid: RadialGrid, N: int) -> np.ndarray:
    lower, diag, upper = laplacian_coefficients(grid, N)
    out = diag * u
    out[1:] += lower[1:] * u[:-1]
    out[:-1] += upper[:-1] * u[1:]
    out[-1] = 0.0
    return out


def laplacian_radial(f: Field, N: int) -> Field:
    """Discrete radial Laplacian u'' + (N-1)/r u'; boundary entry is 0."""
    return Field(f.grid, apply_laplacian(f.values, f.grid, N))


def one_sided_gradients(f):
    """Backward and forward differences per node.

    At the axis the even reflection gives p_minus = -p_plus; at the boundary
    node the forward difference is replaced by the backward one.
    """
    u = _values(f)
    h = f.grid.h if isinstance(f, Field) else None
    if h is None:
        raise TypeError("one_sided_gradients needs a Field")
    d = np.diff(u) / h
    p_minus = np.empty_like(u)
    p_plus = np.empty_like(u)
    p_minus[1:] = d
    p_plus[:-1] = d
    p_minus[0] = -d[0]
    p_plus[-1] = d[-1]
    return p_minus, p_plus


def godunov_hamiltonian(p_minus, p_plus, q: float):
    """Godunov numerical Hamiltonian for |p|^q (convex, minimum at 0).

    H = max(p_minus^+, (-p_plus)^+)^q, nondecreasing in p_minus and
    nonincreasing in p_plus.
    """
    p_minus = np.asarray(p_minus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    out = np.maximum(np.maximum(p_minus, 0.0), np.maximum(-p_plus, 0.0)) ** q
    return out if out.ndim else float(out)


def quadrature_weights(grid: RadialGrid, N: int) -> np.ndarray:
    """Trapezoid weights for ω_{N-1} ∫_0^R u r^{N-1} dr."""
    r = grid.r
    w = grid.h * r ** (N - 1) if N > 1 else np.full(grid.n + 1, grid.h)
    w = np.array(w, dtype=float)
    w[0] *= 0.5
    w[-1] *= 0.5
    return sphere_area(N) * w


def mass(f: Field, N: int) -> float:
    """∫_{B_R} u dx by the trapezoid rule in r."""
    return float(np.dot(quadrature_weights(f.grid, N), f.values))


def restrict_to(f: Field, r_max: float) -> np.ndarray:
    return f.values[f.r <= r_max + 1e-12 * f.grid.h]


def sup_norm(f, r_max: float | None = None) -> float:
    if isinstance(f, Field) and r_max is not None:
        vals = restrict_to(f, r_max)
    else:
        vals = _values(f)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def linf_distance(f, g, r_max: float | None = None) -> float:
    diff = _values(f) - _values(g)
    if r_max is not None:
        diff = diff[f.r <= r_max + 1e-12 * f.grid.h]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def write_field_csv(f: Field, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u"])
        for r, u in zip(f.r, f.values):
            w.writerow([repr(float(r)), repr(float(u))])


def read_field_csv(path) -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    r, u = data[:, 0], data[:, 1]
    n = len(r) - 1
    return Field(RadialGrid(float(r[-1]), n), u)

"""Uniform 2D cell-centered grids, fields, and discrete calculus.

The domain is the rectangle (0, nx*h) x (0, ny*h) with cell centers at
((i+0.5)h, (j+0.5)h).  Gradients are forward differences; how they close at
the boundary is decided by a boundary rule:

* ``DirichletGhost`` surrounds the domain with one ghost ring frozen to the
  boundary datum sampled at ghost centers.  The gradient then lives on the
  (nx+1) x (ny+1) difference cells reaching one step past every edge, so the
  datum pins the solution on all four sides.
* ``NeumannZero`` extends one-sidedly by zero differences at the far edges
  (homogeneous Neumann); the gradient lives on the nx x ny cells.

``divergence_adjoint`` is the exact negative adjoint of ``gradient_forward``
under plain summation, per rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid2",
    "Field",
    "Mask",
    "Ball",
    "DirichletGhost",
    "NeumannZero",
    "gradient_forward",
    "divergence_adjoint",
    "sup_on",
    "lp_on",
    "lp_on_log",
]

_MAX_CELLS = 2 ** 24


@dataclass(frozen=True)
class Grid2:
    """Uniform grid: cell counts nx, ny >= 2 and spacing h > 0."""

    nx: int
    ny: int
    h: float

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ValueError("nx and ny must be at least 2")
        if self.nx * self.ny > _MAX_CELLS:
            raise ValueError("grid exceeds the cell-count cap")
        if not (self.h > 0.0 and np.isfinite(self.h)):
            raise ValueError("h must be positive and finite")

    @property
    def lx(self) -> float:
        return self.nx * self.h

    @property
    def ly(self) -> float:
        return self.ny * self.h

    @property
    def cell_count(self) -> int:
        return self.nx * self.ny

    def xs(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.h

    def ys(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.h

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of cell centers, shapes (nx, ny)."""
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def xs_ext(self) -> np.ndarray:
        return (np.arange(self.nx + 2) - 0.5) * self.h

    def ys_ext(self) -> np.ndarray:
        return (np.arange(self.ny + 2) - 0.5) * self.h

    def contains_ball(self, b: "Ball") -> bool:
        cx, cy = b.center
        return (cx - b.radius > 0.0 and cx + b.radius < self.lx
                and cy - b.radius > 0.0 and cy + b.radius < self.ly)

    def cells_in_ball(self, b: "Ball") -> np.ndarray:
        """Boolean (nx, ny) array: cell center strictly inside the ball."""
        X, Y = self.centers()
        return (X - b.center[0]) ** 2 + (Y - b.center[1]) ** 2 < b.radius ** 2

    def boundary_distance(self, x: float, y: float) -> float:
        return min(x, self.lx - x, y, self.ly - y)


@dataclass
class Field:
    """Values on grid cells, shape (nx, ny, channels)."""

    grid: Grid2
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.shape[:2] != (self.grid.nx, self.grid.ny):
            raise ValueError("values shape does not match the grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    @property
    def channels(self) -> int:
        return self.values.shape[2]

    @classmethod
    def zeros(cls, grid: Grid2, channels: int = 1) -> "Field":
        return cls(grid, np.zeros((grid.nx, grid.ny, channels)))

    @classmethod
    def full(cls, grid: Grid2, value: float, channels: int = 1) -> "Field":
        return cls(grid, np.full((grid.nx, grid.ny, channels), float(value)))

    @classmethod
    def from_function(cls, grid: Grid2, fn, channels: int = 1) -> "Field":
        """Sample ``fn(x, y)`` (scalar or length-``channels``) at cell centers."""
        X, Y = grid.centers()
        out = np.asarray(fn(X, Y), dtype=float)
        if out.ndim == 0:  # constant function
            out = np.full((grid.nx, grid.ny), float(out))
        if out.shape == (grid.nx, grid.ny):
            out = out[:, :, None]
        return cls(grid, out)

    def magnitude(self) -> np.ndarray:
        """Per-cell euclidean norm across channels, shape (nx, ny)."""
        return np.sqrt(np.sum(self.values * self.values, axis=2))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


@dataclass
class Mask:
    """Boolean cell membership on a grid (e.g. the missing-data region)."""

    grid: Grid2
    member: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.member, dtype=bool)
        if m.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("mask shape does not match the grid")
        if m.all():
            raise ValueError("mask must leave at least one cell uncovered")
        self.member = m

    @property
    def count(self) -> int:
        return int(self.member.sum())

    @classmethod
    def empty(cls, grid: Grid2) -> "Mask":
        return cls(grid, np.zeros((grid.nx, grid.ny), dtype=bool))

    @classmethod
    def from_rect(cls, grid: Grid2, x0: float, y0: float,
                  x1: float, y1: float) -> "Mask":
        X, Y = grid.centers()
        return cls(grid, (X > x0) & (X < x1) & (Y > y0) & (Y < y1))


@dataclass(frozen=True)
class Ball:
    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0.0):
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class DirichletGhost:
    """Boundary rule: ghost ring frozen to the datum, shape (nx+2, ny+2, N)."""

    u0_ext: np.ndarray

    @staticmethod
    def from_function(grid: Grid2, fn, channels: int = 1) -> "DirichletGhost":
        X, Y = np.meshgrid(grid.xs_ext(), grid.ys_ext(), indexing="ij")
        out = np.asarray(fn(X, Y), dtype=float)
        if out.ndim == 0:  # constant function
            out = np.full((grid.nx + 2, grid.ny + 2), float(out))
        if out.ndim == 2:
            out = out[:, :, None]
        if not np.all(np.isfinite(out)):
            raise ValueError("boundary datum must be finite")
        return DirichletGhost(out)

    @staticmethod
    def from_field(u0: Field) -> "DirichletGhost":
        """Extend a cell field by edge replication into the ghost ring."""
        ext = np.pad(u0.values, ((1, 1), (1, 1), (0, 0)), mode="edge")
        return DirichletGhost(ext)

    def interior(self, grid: Grid2) -> Field:
        return Field(grid, self.u0_ext[1:-1, 1:-1, :].copy())


class NeumannZero:
    """Boundary rule: zero one-sided differences at the far edges."""

    def __eq__(self, other) -> bool:
        return isinstance(other, NeumannZero)


def _extend(values: np.ndarray, rule: DirichletGhost) -> np.ndarray:
    ext = rule.u0_ext.copy()
    if ext.shape != (values.shape[0] + 2, values.shape[1] + 2, values.shape[2]):
        raise ValueError("ghost ring shape does not match the field")
    ext[1:-1, 1:-1, :] = values
    return ext


def gradient_forward(u: Field, rule) -> np.ndarray:
    """Forward-difference gradient under the given boundary rule.

    Returns shape (nx+1, ny+1, N, 2) for ``DirichletGhost`` (difference cells
    reach one step past every edge) and (nx, ny, N, 2) for ``NeumannZero``
    (far-edge slots are zero).  Exact on affine fields under the Dirichlet
    rule with a matching datum.
    """
    h = u.grid.h
    v = u.values
    if isinstance(rule, DirichletGhost):
        ext = _extend(v, rule)
        gx = (ext[1:, :-1, :] - ext[:-1, :-1, :]) / h
        gy = (ext[:-1, 1:, :] - ext[:-1, :-1, :]) / h
        return np.stack([gx, gy], axis=-1)
    if isinstance(rule, NeumannZero):
        gx = np.zeros_like(v)
        gy = np.zeros_like(v)
        gx[:-1, :, :] = (v[1:, :, :] - v[:-1, :, :]) / h
        gy[:, :-1, :] = (v[:, 1:, :] - v[:, :-1, :]) / h
        return np.stack([gx, gy], axis=-1)
    raise TypeError("rule must be DirichletGhost or NeumannZero")


def divergence_adjoint(g: np.ndarray, grid: Grid2, rule) -> Field:
    """Exact negative adjoint of ``gradient_forward`` under plain sums.

    For every admissible u:  sum(gradient_forward(u) : g) =
    -sum(u * divergence_adjoint(g)).  Dead far-edge slots of the Neumann rule
    are ignored.
    """
    g = np.asarray(g, dtype=float)
    h = grid.h
    if isinstance(rule, DirichletGhost):
        if g.shape[0] != grid.nx + 1 or g.shape[1] != grid.ny + 1:
            raise ValueError("gradient shape does not match the Dirichlet rule")
        gx = g[..., 0]
        gy = g[..., 1]
        out = (gx[1:, 1:] - gx[:-1, 1:] + gy[1:, 1:] - gy[1:, :-1]) / h
        return Field(grid, out)
    if isinstance(rule, NeumannZero):
        if g.shape[0] != grid.nx or g.shape[1] != grid.ny:
            raise ValueError("gradient shape does not match the Neumann rule")
        gx = g[..., 0].copy()
        gy = g[..., 1].copy()
        gx[-1, :] = 0.0
        gy[:, -1] = 0.0
        out = np.zeros_like(gx)
        out += gx
        out[1:, :] -= gx[:-1, :]
        out += gy
        out[:, 1:] -= gy[:, :-1]
        return Field(grid, out / h)
    raise TypeError("rule must be DirichletGhost or NeumannZero")


def _ball_cells(u: Field, b: Ball) -> np.ndarray:
    if not u.grid.contains_ball(b):
        raise ValueError("ball is not contained in the domain")
    inside = u.grid.cells_in_ball(b)
    if not inside.any():
        raise ValueError("ball contains no cell centers")
    return inside


def sup_on(u: Field, b: Ball) -> float:
    """Max of the per-cell magnitude over cells strictly inside the ball."""
    inside = _ball_cells(u, b)
    return float(np.max(u.magnitude()[inside]))


def lp_on_log(u: Field, b: Ball, p: float) -> float:
    """log of the midpoint-rule integral of |u|^p over the ball.

    Factored through the maximum so large exponents neither overflow nor
    underflow.  Returns -inf when u vanishes on the ball.
    """
    if p <= 0.0:
        raise ValueError("p must be positive")
    inside = _ball_cells(u, b)
    mag = u.magnitude()[inside]
    m = float(np.max(mag))
    if m == 0.0:
        return -np.inf
    scaled = mag / m
    s = float(np.sum(scaled ** p))
    return p * np.log(m) + np.log(s) + 2.0 * np.log(u.grid.h)


def lp_on(u: Field, b: Ball, p: float) -> float:
    """Midpoint-rule integral of |u|^p over cells strictly inside the ball."""
    lg = lp_on_log(u, b, p)
    if lg == -np.inf:
        return 0.0
    return float(np.exp(lg))

"""Discrete energies of linear growth and their Euler residuals.

Two problem classes:

* ``DirichletProblem``: minimize the integral of ``F(grad w)`` with the
  boundary datum imposed through a frozen ghost ring.  The difference cells
  reach one step past every edge; their sum is normalized by
  ``nx*ny / ((nx+1)*(ny+1))`` so the energy of an affine field is exactly
  ``area * F(A)`` and affine data are exact critical points.
* ``FidelityProblem``: minimize ``F(grad w)`` plus ``lam * (w - f_delta)^2``
  off the missing-data mask, with homogeneous Neumann differences.

A ``RegularizationState`` adds ``delta * phi_mu`` to the density, producing
the strictly elliptic energies the continuation solver walks down.
``euler_residual`` is the exact gradient of the discrete energy with respect
to the cell values (finite-difference checkable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (Ball, DirichletGhost, Field, Grid2, Mask, NeumannZero,
                    divergence_adjoint, gradient_forward)
from .profiles import (RadialProfile, combined, phi_mu, profile_d1,
                       profile_d2, profile_eval, recession_slope, slope_ratio)

__all__ = [
    "DirichletProblem",
    "FidelityProblem",
    "RegularizationState",
    "clip_data",
    "energy_dirichlet",
    "energy_fidelity",
    "energy_relaxed",
    "relaxed_boundary_penalty",
    "euler_residual",
    "total_variation",
]

# the fields live on 2D grids, so the admissible exponent window for the
# regularizer is 1 < mu < 1 + 2/n with n = 2 for the Dirichlet class and
# 1 < mu < 2 for the fidelity class (the same interval in this dimension)
_SPACE_DIM = 2


@dataclass(frozen=True)
class RegularizationState:
    """One rung of the continuation ladder: density becomes
    ``delta * phi_mu + base``."""

    delta: float
    mu: float
    kind: str  # "dirichlet" | "fidelity"

    def __post_init__(self) -> None:
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.kind == "dirichlet":
            hi = 1.0 + 2.0 / _SPACE_DIM
        elif self.kind == "fidelity":
            hi = 2.0
        else:
            raise ValueError("kind must be 'dirichlet' or 'fidelity'")
        if not (1.0 < self.mu < hi):
            raise ValueError(f"mu must lie in (1, {hi:g}) for {self.kind}")

    def apply(self, base: RadialProfile) -> RadialProfile:
        return combined(self.delta, self.mu, base)


@dataclass
class DirichletProblem:
    grid: Grid2
    ghost: DirichletGhost
    density: RadialProfile

    def __post_init__(self) -> None:
        expect = (self.grid.nx + 2, self.grid.ny + 2)
        if self.ghost.u0_ext.shape[:2] != expect:
            raise ValueError("ghost ring shape does not match the grid")

    @property
    def channels(self) -> int:
        return self.ghost.u0_ext.shape[2]

    @property
    def kind(self) -> str:
        return "dirichlet"

    def u0_interior(self) -> Field:
        return self.ghost.interior(self.grid)

    @classmethod
    def from_function(cls, grid: Grid2, fn, density: RadialProfile,
                      channels: int = 1) -> "DirichletProblem":
        return cls(grid, DirichletGhost.from_function(grid, fn, channels), density)

    @classmethod
    def from_field(cls, u0: Field, density: RadialProfile) -> "DirichletProblem":
        return cls(u0.grid, DirichletGhost.from_field(u0), density)


@dataclass
class FidelityProblem:
    grid: Grid2
    f: Field
    mask: Mask
    lam: float
    density: RadialProfile

    def __post_init__(self) -> None:
        if self.f.grid != self.grid or self.mask.grid != self.grid:
            raise ValueError("data and mask must live on the problem grid")
        if self.f.channels != 1:
            raise ValueError("fidelity problems are scalar")
        if not (self.lam > 0.0):
            raise ValueError("lam must be positive")

    @property
    def channels(self) -> int:
        return 1

    @property
    def kind(self) -> str:
        return "fidelity"


def clip_data(f: Field, delta: float) -> Field:
    """Symmetric clamp of the datum at height 1/delta."""
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    cap = 1.0 / delta
    return Field(f.grid, np.clip(f.values, -cap, cap))


def _check_state(problem, reg: RegularizationState | None) -> RadialProfile:
    if reg is None:
        return problem.density
    if reg.kind != problem.kind:
        raise ValueError(f"regularization state is for {reg.kind!r} problems")
    return reg.apply(problem.density)


def _check_field(problem, w: Field) -> None:
    if w.grid != problem.grid:
        raise ValueError("field grid does not match the problem")
    if w.channels != problem.channels:
        raise ValueError("field channel count does not match the problem")


# ---------------------------------------------------------------------------
# fast kernels on raw arrays (shared by the public API and the solver)

class DirichletOps:
    """Energy / residual / curvature-diagonal kernels on raw (nx, ny, N)."""

    def __init__(self, problem: DirichletProblem,
                 reg: RegularizationState | None):
        self.problem = problem
        self.profile = _check_state(problem, reg)
        g = problem.grid
        self.h = g.h
        self.h2 = g.h * g.h
        # uniform weight making the difference-cell sum integrate exactly
        self.rho = g.nx * g.ny / float((g.nx + 1) * (g.ny + 1))
        self._ext = problem.ghost.u0_ext.astype(float).copy()

    def _grad(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ext = self._ext
        ext[1:-1, 1:-1, :] = w
        gx = (ext[1:, :-1, :] - ext[:-1, :-1, :]) / self.h
        gy = (ext[:-1, 1:, :] - ext[:-1, :-1, :]) / self.h
        t = np.sqrt(np.einsum("ijc,ijc->ij", gx, gx)
                    + np.einsum("ijc,ijc->ij", gy, gy))
        return gx, gy, t

    def energy(self, w: np.ndarray) -> float:
        _, _, t = self._grad(w)
        return self.rho * self.h2 * float(np.sum(profile_eval(self.profile, t)))

    def residual(self, w: np.ndarray) -> np.ndarray:
        gx, gy, t = self._grad(w)
        coef = slope_ratio(self.profile, t)[:, :, None]
        dfx = coef * gx
        dfy = coef * gy
        scale = self.rho * self.h2 / self.h
        return scale * (dfx[:-1, 1:, :] - dfx[1:, 1:, :]
                        + dfy[1:, :-1, :] - dfy[1:, 1:, :])

    def curvature_diag(self, w: np.ndarray) -> np.ndarray:
        """Per-cell upper bound on the energy Hessian diagonal, shape (nx, ny, 1)."""
        _, _, t = self._grad(w)
        kap = np.maximum(profile_d2(self.profile, t),
                         slope_ratio(self.profile, t))
        diag = self.rho * (kap[:-1, 1:] + 2.0 * kap[1:, 1:] + kap[1:, :-1])
        return diag[:, :, None]

    def default_init(self) -> np.ndarray:
        return self._ext[1:-1, 1:-1, :].copy()


class FidelityOps:
    """Same kernels for the Neumann + data-term energy."""

    def __init__(self, problem: FidelityProblem,
                 reg: RegularizationState | None):
        self.problem = problem
        self.profile = _check_state(problem, reg)
        g = problem.grid
        self.h = g.h
        self.h2 = g.h * g.h
        self.lam = problem.lam
        self.outside = (~problem.mask.member)[:, :, None]
        if reg is None:
            self.fd = problem.f.values.copy()
        else:
            self.fd = clip_data(problem.f, reg.delta).values

    def _grad(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        gx = np.zeros_like(w)
        gy = np.zeros_like(w)
        gx[:-1, :, :] = (w[1:, :, :] - w[:-1, :, :]) / self.h
        gy[:, :-1, :] = (w[:, 1:, :] - w[:, :-1, :]) / self.h
        t = np.sqrt(np.einsum("ijc,ijc->ij", gx, gx)
                    + np.einsum("ijc,ijc->ij", gy, gy))
        return gx, gy, t

    def energy(self, w: np.ndarray) -> float:
        _, _, t = self._grad(w)
        reg_term = self.h2 * float(np.sum(profile_eval(self.profile, t)))
        diff = (w - self.fd) * self.outside
        return reg_term + self.lam * self.h2 * float(np.sum(diff * diff))

    def residual(self, w: np.ndarray) -> np.ndarray:
        gx, gy, t = self._grad(w)
        coef = slope_ratio(self.profile, t)[:, :, None]
        dfx = coef * gx
        dfy = coef * gy
        out = dfx.copy()
        out[1:, :, :] -= dfx[:-1, :, :]
        out += dfy
        out[:, 1:, :] -= dfy[:, :-1, :]
        out *= -self.h2 / self.h
        out += 2.0 * self.lam * self.h2 * (w - self.fd) * self.outside
        return out

    def curvature_diag(self, w: np.ndarray) -> np.ndarray:
        _, _, t = self._grad(w)
        kap = np.maximum(profile_d2(self.profile, t),
                         slope_ratio(self.profile, t))
        diag = np.zeros_like(t)
        diag[:-1, :] += kap[:-1, :]
        diag[1:, :] += kap[:-1, :]
        diag[:, :-1] += kap[:, :-1]
        diag[:, 1:] += kap[:, :-1]
        diag = diag[:, :, None] + 2.0 * self.lam * self.h2 * self.outside
        return diag

    def default_init(self) -> np.ndarray:
        fill = float(np.mean(self.fd[self.outside])) if self.outside.any() else 0.0
        return np.where(self.outside, self.fd, fill)


def assemble_ops(problem, reg: RegularizationState | None):
    if isinstance(problem, DirichletProblem):
        return DirichletOps(problem, reg)
    if isinstance(problem, FidelityProblem):
        return FidelityOps(problem, reg)
    raise TypeError("problem must be DirichletProblem or FidelityProblem")


# ---------------------------------------------------------------------------
# public API

def energy_dirichlet(p: DirichletProblem, reg: RegularizationState | None,
                     w: Field) -> float:
    """Discrete Dirichlet energy of w; ``reg=None`` drops the delta term."""
    _check_field(p, w)
    return DirichletOps(p, reg).energy(w.values)


def energy_fidelity(p: FidelityProblem, reg: RegularizationState | None,
                    w: Field) -> float:
    """Regularizer plus ``lam * sum h^2 (w - f_delta)^2`` off the mask."""
    _check_field(p, w)
    return FidelityOps(p, reg).energy(w.values)


def euler_residual(p, reg: RegularizationState | None, w: Field) -> Field:
    """Exact gradient of the discrete energy with respect to cell values."""
    _check_field(p, w)
    return Field(p.grid, assemble_ops(p, reg).residual(w.values))


def relaxed_boundary_penalty(p: DirichletProblem, w: Field) -> float:
    """Boundary penalty ``sum h * k * |u0 - w|`` over the perimeter cells.

    k is the slope at infinity of the base density, and each cell of the
    boundary ring is counted once.  Together with the interior gradient sum
    this is the relaxed form of the Dirichlet energy: mismatching the datum
    costs area (the slope) rather than being forbidden.
    """
    _check_field(p, w)
    k = recession_slope(p.density)
    u0 = p.ghost.u0_ext[1:-1, 1:-1, :]
    jump = np.sqrt(np.sum((u0 - w.values) ** 2, axis=2))
    ring = np.zeros(jump.shape, dtype=bool)
    ring[0, :] = ring[-1, :] = True
    ring[:, 0] = ring[:, -1] = True
    return float(p.grid.h * k * jump[ring].sum())


def energy_relaxed(p: DirichletProblem, w: Field) -> float:
    """Interior regularizer (Neumann differences) plus the boundary penalty."""
    _check_field(p, w)
    g = gradient_forward(w, NeumannZero())
    t = np.sqrt(np.sum(g * g, axis=(2, 3)))
    interior = p.grid.h ** 2 * float(np.sum(profile_eval(p.density, t)))
    return interior + relaxed_boundary_penalty(p, w)


def total_variation(p, w: Field) -> float:
    """Discrete integral of |grad w| under the problem's boundary rule."""
    _check_field(p, w)
    if isinstance(p, DirichletProblem):
        ops = DirichletOps(p, None)
        _, _, t = ops._grad(w.values)
        return ops.rho * ops.h2 * float(np.sum(t))
    ops = FidelityOps(p, None)
    _, _, t = ops._grad(w.values)
    return ops.h2 * float(np.sum(t))

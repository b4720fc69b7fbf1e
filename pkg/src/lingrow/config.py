"""JSON run configuration -> problem objects.

A config is one JSON object; which sections are required depends on the
command.  ``density`` (or the problem's density) feeds the certification;
``grid`` + ``problem`` + ``solver`` feed the continuation solve; ``ball``
(explicit, or ``auto`` around ``x0`` for fidelity problems) feeds the
interior-boundedness audit.  Malformed configs raise ``ConfigError``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .energy import DirichletProblem, FidelityProblem
from .grids import DirichletGhost, Field, Grid2, Mask
from .instances import make_field, make_function, snap_to_cell
from .moser import BallFamily
from .pgmio import field_from_csv, field_from_pgm, mask_from_pgm
from .profiles import RadialProfile
from .solver import SolverConfig

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    seed: int = 0
    density: RadialProfile | None = None
    density_t_max: float = 100.0
    density_samples: int = 1000
    grid: Grid2 | None = None
    problem: DirichletProblem | FidelityProblem | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    ball: BallFamily | None = None
    ball_auto_x0: tuple[float, float] | None = None
    ball_n: int = 2
    ball_j_max: int = 6
    s_values: tuple[float, ...] = (0.0, 1.0, 3.0)
    minimality_trials: int = 100

    def require_density(self) -> RadialProfile:
        if self.density is not None:
            return self.density
        if self.problem is not None:
            return self.problem.density
        raise ConfigError("config needs a 'density' or a 'problem'")

    def require_problem(self):
        if self.problem is None:
            raise ConfigError("config needs a 'problem' section")
        return self.problem


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _parse_field(spec, grid: Grid2, rng: np.random.Generator,
                 base_dir: str) -> Field:
    _expect(isinstance(spec, dict), "field description must be an object")
    if "synthetic" in spec:
        try:
            return make_field(grid, spec["synthetic"], rng, snap_center=True)
        except (KeyError, ValueError) as err:
            raise ConfigError(f"bad synthetic field: {err}") from err
    if "pgm" in spec:
        p = spec["pgm"]
        try:
            f = field_from_pgm(os.path.join(base_dir, p["path"]), grid.h,
                               float(p["lo"]), float(p["hi"]))
        except (OSError, KeyError, ValueError) as err:
            raise ConfigError(f"bad PGM field: {err}") from err
        _expect(f.grid == grid, "PGM dimensions do not match the grid")
        return f
    if "csv" in spec:
        try:
            f = field_from_csv(os.path.join(base_dir, spec["csv"]["path"]))
        except (OSError, KeyError, ValueError) as err:
            raise ConfigError(f"bad CSV field: {err}") from err
        _expect(f.grid == grid, "CSV grid does not match the config grid")
        return f
    raise ConfigError("field must be 'synthetic', 'pgm', or 'csv'")


def _parse_mask(spec, grid: Grid2, base_dir: str) -> Mask:
    if spec is None:
        return Mask.empty(grid)
    _expect(isinstance(spec, dict), "mask description must be an object")
    if "rect" in spec:
        r = spec["rect"]
        _expect(isinstance(r, list) and len(r) == 4, "mask rect needs 4 numbers")
        try:
            return Mask.from_rect(grid, *map(float, r))
        except ValueError as err:
            raise ConfigError(f"bad mask rect: {err}") from err
    if "pgm" in spec:
        try:
            m = mask_from_pgm(os.path.join(base_dir, spec["pgm"]["path"]), grid.h)
        except (OSError, KeyError, ValueError) as err:
            raise ConfigError(f"bad mask PGM: {err}") from err
        _expect(m.grid == grid, "mask dimensions do not match the grid")
        return m
    raise ConfigError("mask must be 'rect' or 'pgm'")


def _parse_problem(spec, grid: Grid2 | None, rng: np.random.Generator,
                   base_dir: str):
    _expect(isinstance(spec, dict), "'problem' must be an object")
    _expect(grid is not None, "'problem' needs a 'grid' section")
    kind = spec.get("kind")
    try:
        density = RadialProfile.from_dict(spec["density"])
    except (KeyError, ValueError) as err:
        raise ConfigError(f"bad problem density: {err}") from err
    if kind == "dirichlet":
        _expect("u0" in spec, "dirichlet problem needs 'u0'")
        u0_spec = spec["u0"]
        if isinstance(u0_spec, dict) and "synthetic" in u0_spec:
            # analytic data can be sampled on the ghost ring directly
            syn = dict(u0_spec["synthetic"])
            if "center" in syn:
                syn["center"] = snap_to_cell(grid, tuple(syn["center"]))
            _expect(float(syn.get("noise", 0.0)) == 0.0,
                    "dirichlet data must be noise-free")
            try:
                ghost = DirichletGhost.from_function(grid, make_function(syn))
            except ValueError as err:
                raise ConfigError(f"bad synthetic datum: {err}") from err
            return DirichletProblem(grid, ghost, density)
        u0 = _parse_field(u0_spec, grid, rng, base_dir)
        return DirichletProblem.from_field(u0, density)
    if kind == "fidelity":
        _expect("f" in spec, "fidelity problem needs 'f'")
        f = _parse_field(spec["f"], grid, rng, base_dir)
        mask = _parse_mask(spec.get("mask"), grid, base_dir)
        lam = spec.get("lambda", 1.0)
        try:
            return FidelityProblem(grid, f, mask, float(lam), density)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad fidelity problem: {err}") from err
    raise ConfigError("problem kind must be 'dirichlet' or 'fidelity'")


def parse_config(raw: dict, base_dir: str = ".",
                 seed_override: int | None = None) -> RunConfig:
    _expect(isinstance(raw, dict), "config must be a JSON object")
    cfg = RunConfig()
    cfg.seed = int(raw.get("seed", 0)) if seed_override is None else seed_override
    rng = np.random.default_rng(cfg.seed)

    if "density" in raw:
        try:
            cfg.density = RadialProfile.from_dict(raw["density"])
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"bad density: {err}") from err
    dc = raw.get("density_check", {})
    _expect(isinstance(dc, dict), "'density_check' must be an object")
    cfg.density_t_max = float(dc.get("t_max", 100.0))
    cfg.density_samples = int(dc.get("samples", 1000))

    if "grid" in raw:
        g = raw["grid"]
        _expect(isinstance(g, dict), "'grid' must be an object")
        try:
            cfg.grid = Grid2(int(g["nx"]), int(g["ny"]), float(g["h"]))
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"bad grid: {err}") from err

    if "solver" in raw:
        s = raw["solver"]
        _expect(isinstance(s, dict), "'solver' must be an object")
        try:
            cfg.solver = SolverConfig(
                mu=float(s.get("mu", 1.5)),
                delta_schedule=tuple(s.get("delta_schedule",
                                           (1e-1, 1e-2, 1e-3, 1e-4))),
                residual_tol=(None if s.get("residual_tol") is None
                              else float(s["residual_tol"])),
                max_iters=int(s.get("max_iters", 50000)),
                armijo_slope=float(s.get("armijo_slope", 1e-4)),
                armijo_backtrack=float(s.get("armijo_backtrack", 0.5)),
                spectral_steps=bool(s.get("spectral_steps", True)))
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad solver section: {err}") from err
    _expect(1.0 < cfg.solver.mu < 2.0,
            "solver mu must lie strictly between 1 and 2")

    if "problem" in raw:
        cfg.problem = _parse_problem(raw["problem"], cfg.grid, rng, base_dir)

    if "ball" in raw:
        b = raw["ball"]
        _expect(isinstance(b, dict), "'ball' must be an object")
        cfg.ball_n = int(b.get("n", 2))
        cfg.ball_j_max = int(b.get("j_max", 6))
        if b.get("auto"):
            _expect("x0" in b, "auto ball selection needs 'x0'")
            x0 = b["x0"]
            _expect(isinstance(x0, list) and len(x0) == 2, "'x0' needs 2 numbers")
            cfg.ball_auto_x0 = (float(x0[0]), float(x0[1]))
        else:
            _expect("center" in b and "r0" in b,
                    "ball needs 'center' and 'r0' (or 'auto' with 'x0')")
            c = b["center"]
            _expect(isinstance(c, list) and len(c) == 2,
                    "'center' needs 2 numbers")
            try:
                cfg.ball = BallFamily((float(c[0]), float(c[1])),
                                      float(b["r0"]), n=cfg.ball_n,
                                      j_max=cfg.ball_j_max)
            except ValueError as err:
                raise ConfigError(f"bad ball: {err}") from err

    if "s_values" in raw:
        s = raw["s_values"]
        _expect(isinstance(s, list) and s, "'s_values' must be a non-empty list")
        cfg.s_values = tuple(float(x) for x in s)
    if "minimality_trials" in raw:
        cfg.minimality_trials = int(raw["minimality_trials"])
    return cfg


def load_config(path: str | os.PathLike,
                seed_override: int | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return parse_config(raw, base_dir=os.path.dirname(os.fspath(path)) or ".",
                        seed_override=seed_override)

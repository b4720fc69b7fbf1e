"""Radial densities of linear growth and their certification.

A profile is a convex scalar function ``t -> value`` on ``t >= 0`` inducing a
matrix density ``F(P) = profile(|P|)`` (Frobenius norm).  Three kinds are
supported:

* ``phi_mu``: the double integral of ``(1+t)^(-mu)``, the canonical density
  whose second derivative decays exactly like ``(1+t)^(-mu)``;
* ``minimal_surface``: ``sqrt(1+t^2) - 1``;
* ``combined``: ``delta * phi_mu + base``, the regularized density used by
  the continuation solver.

``certify_conditions`` samples a profile and fits the tightest constants for
the structural conditions every density must satisfy (zero value and slope at
the origin, linear-growth sandwich, convexity, curvature decay, and the
mu-ellipticity lower bound).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RadialProfile",
    "phi_mu",
    "minimal_surface",
    "combined",
    "profile_eval",
    "profile_d1",
    "profile_d2",
    "density_grad",
    "density_hess_quadform",
    "recession_slope",
    "GrowthConstants",
    "ConditionCheck",
    "ConditionReport",
    "certify_conditions",
]

# |mu - 2| below this switches the closed form to a series in (mu - 2); the
# direct formula loses ~|mu-2|^-1 digits to cancellation there.
_MU2_WINDOW = 1e-6
# t below this evaluates d1(t)/t by its limit d2(0) (second-order Taylor).
_ORIGIN_CUTOFF = 1e-8
# absolute slack on sign conditions (value/slope at zero, convexity).
_SIGN_TOL = 1e-10


@dataclass(frozen=True)
class RadialProfile:
    """Description of a radial density profile.

    ``kind`` is one of ``"phi_mu"``, ``"minimal_surface"``, ``"combined"``.
    ``mu`` is required for ``phi_mu`` and ``combined``; ``delta`` and ``base``
    only for ``combined``.  ``base`` may not itself be combined.
    """

    kind: str
    mu: float | None = None
    delta: float | None = None
    base: "RadialProfile | None" = None

    def __post_init__(self) -> None:
        if self.kind == "phi_mu":
            if self.mu is None or not (self.mu > 1.0):
                raise ValueError("phi_mu requires mu > 1")
            if self.delta is not None or self.base is not None:
                raise ValueError("phi_mu takes no delta or base")
        elif self.kind == "minimal_surface":
            if self.mu is not None or self.delta is not None or self.base is not None:
                raise ValueError("minimal_surface takes no parameters")
        elif self.kind == "combined":
            if self.mu is None or not (self.mu > 1.0):
                raise ValueError("combined requires mu > 1")
            if self.delta is None or not (0.0 < self.delta < 1.0):
                raise ValueError("combined requires delta in (0, 1)")
            if not isinstance(self.base, RadialProfile):
                raise ValueError("combined requires a base profile")
            if self.base.kind == "combined":
                raise ValueError("combined base must not itself be combined")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.mu is not None:
            d["mu"] = self.mu
        if self.delta is not None:
            d["delta"] = self.delta
        if self.base is not None:
            d["base"] = self.base.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict) -> "RadialProfile":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValueError("profile description must be a dict with a 'kind'")
        kind = d["kind"]
        if kind == "phi_mu":
            return phi_mu(float(d["mu"]))
        if kind == "minimal_surface":
            return minimal_surface()
        if kind == "combined":
            return combined(float(d["delta"]), float(d["mu"]),
                            RadialProfile.from_dict(d["base"]))
        raise ValueError(f"unknown profile kind {kind!r}")


def phi_mu(mu: float) -> RadialProfile:
    return RadialProfile("phi_mu", mu=float(mu))


def minimal_surface() -> RadialProfile:
    return RadialProfile("minimal_surface")


def combined(delta: float, mu: float, base: RadialProfile) -> RadialProfile:
    return RadialProfile("combined", mu=float(mu), delta=float(delta), base=base)


def _check_t(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if not np.all(np.isfinite(arr)):
        raise ValueError("t must be finite")
    if np.any(arr < 0.0):
        raise ValueError("t must be non-negative")
    return arr, scalar


def _phi_eval(mu: float, t: np.ndarray) -> np.ndarray:
    L = np.log1p(t)
    eps = mu - 2.0
    if abs(eps) < _MU2_WINDOW:
        # series in (mu - 2) around the logarithmic form t - log(1+t)
        c1 = 0.5 * L * L + L - t
        c2 = t - L - 0.5 * L * L - L * L * L / 6.0
        return (t - L) + eps * (c1 + eps * c2)
    return (t + np.expm1(-eps * L) / eps) / (mu - 1.0)


def _phi_d1(mu: float, t: np.ndarray) -> np.ndarray:
    return -np.expm1((1.0 - mu) * np.log1p(t)) / (mu - 1.0)


def _phi_d2(mu: float, t: np.ndarray) -> np.ndarray:
    return (1.0 + t) ** (-mu)


def _ms_eval(t: np.ndarray) -> np.ndarray:
    tt = t * t
    return tt / (1.0 + np.sqrt(1.0 + tt))


def _ms_d1(t: np.ndarray) -> np.ndarray:
    return t / np.sqrt(1.0 + t * t)


def _ms_d2(t: np.ndarray) -> np.ndarray:
    return (1.0 + t * t) ** (-1.5)


def _eval_impl(p: RadialProfile, t: np.ndarray, order: int) -> np.ndarray:
    if p.kind == "phi_mu":
        f = (_phi_eval, _phi_d1, _phi_d2)[order]
        return f(p.mu, t)
    if p.kind == "minimal_surface":
        f = (_ms_eval, _ms_d1, _ms_d2)[order]
        return f(t)
    # combined: delta * phi_mu + base, evaluated term by term
    return p.delta * _eval_impl(phi_mu(p.mu), t, order) + _eval_impl(p.base, t, order)


def profile_eval(p: RadialProfile, t):
    """Profile value at ``t >= 0`` (scalar or array)."""
    arr, scalar = _check_t(t)
    out = _eval_impl(p, arr, 0)
    return float(out) if scalar else out


def profile_d1(p: RadialProfile, t):
    """First derivative; non-negative, non-decreasing, bounded."""
    arr, scalar = _check_t(t)
    out = _eval_impl(p, arr, 1)
    return float(out) if scalar else out


def profile_d2(p: RadialProfile, t):
    """Second derivative; non-negative, decaying at infinity."""
    arr, scalar = _check_t(t)
    out = _eval_impl(p, arr, 2)
    return float(out) if scalar else out


def slope_ratio(p: RadialProfile, t):
    """``d1(t)/t`` with its limit ``d2(0)`` used below the origin cutoff."""
    arr, scalar = _check_t(t)
    small = arr < _ORIGIN_CUTOFF
    safe = np.where(small, 1.0, arr)
    out = np.where(small, profile_d2(p, 0.0), _eval_impl(p, arr, 1) / safe)
    return float(out) if scalar else out


def recession_slope(p: RadialProfile) -> float:
    """Limit of value/t as t -> infinity (the slope at infinity)."""
    if p.kind == "phi_mu":
        return 1.0 / (p.mu - 1.0)
    if p.kind == "minimal_surface":
        return 1.0
    return p.delta / (p.mu - 1.0) + recession_slope(p.base)


def density_grad(p: RadialProfile, P) -> np.ndarray:
    """Gradient of ``F(P) = profile(|P|)`` with respect to the matrix P."""
    P = np.asarray(P, dtype=float)
    if not np.all(np.isfinite(P)):
        raise ValueError("P must be finite")
    t = float(np.sqrt(np.sum(P * P)))
    if t < _ORIGIN_CUTOFF:
        return profile_d2(p, 0.0) * P
    return (profile_d1(p, t) / t) * P


def density_hess_quadform(p: RadialProfile, P, Q) -> float:
    """Second derivative of F at P applied to (Q, Q).

    Splits Q into its radial component along P and the tangential rest:
    ``d1(|P|)/|P|`` acts tangentially, ``d2(|P|)`` radially.  At P = 0 the
    form collapses to ``d2(0) |Q|^2``.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape:
        raise ValueError("P and Q must have the same shape")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
        raise ValueError("P and Q must be finite")
    q2 = float(np.sum(Q * Q))
    t = float(np.sqrt(np.sum(P * P)))
    if t == 0.0:
        return profile_d2(p, 0.0) * q2
    pq = float(np.sum(P * Q))
    radial2 = (pq / t) ** 2
    ratio = profile_d1(p, t) / t if t >= _ORIGIN_CUTOFF else profile_d2(p, 0.0)
    return ratio * (q2 - radial2) + profile_d2(p, t) * radial2


@dataclass(frozen=True)
class GrowthConstants:
    """Tightest constants fitted on a sample grid.

    ``nu1 * t - nu2 <= value <= nu3 * t + nu4`` (linear growth sandwich),
    ``max(d2, d1/t) <= nu5 / (1+t)`` (curvature decay), and
    ``min(d2, d1/t) >= nu6 * (1+t)^(-mu_certified)`` (mu-ellipticity).
    """

    nu1: float
    nu2: float
    nu3: float
    nu4: float
    nu5: float
    nu6: float | None = None
    mu_certified: float | None = None

    def __post_init__(self) -> None:
        if self.nu1 > self.nu3 + 1e-12:
            raise ValueError("nu1 must not exceed nu3")
        if min(self.nu2, self.nu4) < 0.0:
            raise ValueError("nu2 and nu4 must be non-negative")
        if not (self.nu5 > 0.0):
            raise ValueError("nu5 must be positive")
        if (self.nu6 is None) != (self.mu_certified is None):
            raise ValueError("nu6 and mu_certified come together")

    def to_dict(self) -> dict:
        return {
            "nu1": self.nu1, "nu2": self.nu2, "nu3": self.nu3,
            "nu4": self.nu4, "nu5": self.nu5, "nu6": self.nu6,
            "mu_certified": self.mu_certified,
        }


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    worst_violation: float
    at_t: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name, "passed": bool(self.passed),
            "worst_violation": self.worst_violation,
            "at_t": self.at_t, "note": self.note,
        }


@dataclass
class ConditionReport:
    profile: RadialProfile
    t_max: float
    sample_count: int
    checks: dict[str, ConditionCheck] = field(default_factory=dict)
    constants: GrowthConstants | None = None

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "t_max": self.t_max,
            "sample_count": self.sample_count,
            "all_passed": self.all_passed,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
            "constants": self.constants.to_dict() if self.constants else None,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _sample_grid(t_max: float, samples: int) -> np.ndarray:
    """Log-spaced grid on (0, t_max] with a linear cluster in [0, 1] and 0."""
    n_lin = max(samples // 4, 8)
    n_log = max(samples - n_lin, 8)
    lo = min(1e-8, t_max * 1e-8)
    grid = np.concatenate([
        [0.0],
        np.linspace(0.0, min(1.0, t_max), n_lin),
        np.geomspace(lo, t_max, n_log),
    ])
    return np.unique(grid)


def _ray(t_max: float, points: int = 160) -> np.ndarray:
    """Uniform-log evaluation ray over the last four decades up to t_max."""
    return np.geomspace(max(t_max * 1e-4, 1e-6), t_max, points)


def _tail_is_bounded(v: np.ndarray) -> tuple[bool, float]:
    """Boundedness test for values sampled on a uniform-log ray.

    On such a ray the increments of any power-law tail form a geometric
    sequence, so projecting their sum detects whether the quantity levels
    off or keeps growing.  Returns (bounded, projected_limit).
    """
    tail = v[-max(8, len(v) // 4):]
    d = np.diff(tail)
    scale = max(1.0, float(np.max(np.abs(tail))))
    if np.all(d <= 1e-13 * scale):
        return True, float(tail[-1])
    if len(d) < 3:
        return True, float(tail[-1])
    ratios = d[1:] / np.where(np.abs(d[:-1]) > 1e-300, d[:-1], 1e-300)
    good = ratios[np.isfinite(ratios) & (ratios > 0.0)]
    if len(good) == 0:
        return True, float(tail[-1])
    r = float(np.median(good))
    if r >= 0.999:
        return False, math.inf
    projected = float(tail[-1] + d[-1] * r / (1.0 - r))
    return projected <= tail[-1] + 3.0 * scale, projected


def _bounded_on_ray(fn, t_max: float) -> bool:
    bounded, _ = _tail_is_bounded(np.asarray(fn(_ray(t_max)), dtype=float))
    return bounded


def _ellipticity_floor(p: RadialProfile, t: np.ndarray) -> np.ndarray:
    """min(d2, d1/t) on the sample grid, with the t=0 limit handled."""
    return np.minimum(profile_d2(p, t), slope_ratio(p, t))


_MU_SCAN_STEP = 0.05


def _floor_decay_exponent(p: RadialProfile, t_max: float) -> float:
    """Asymptotic decay rate beta of the ellipticity floor, ~ (1+t)^(-beta).

    Local log-log slopes on the uniform-log ray are extrapolated to
    1/(1+t) -> 0 by a linear fit over the most asymptotic quarter, which
    cancels the leading finite-radius correction.  A floor that decays
    faster than any power (or vanishes) comes back as +inf.
    """
    ray = _ray(t_max)
    f = _ellipticity_floor(p, ray)
    if np.any(f <= 0.0) or not np.all(np.isfinite(f)):
        return math.inf
    lt = np.log1p(ray)
    s = np.diff(np.log(f)) / np.diff(lt)
    x = np.exp(-0.5 * (lt[:-1] + lt[1:]))
    keep = max(8, len(s) // 4)
    s, x = s[-keep:], x[-keep:]
    coef = np.polynomial.polynomial.polyfit(x, s, 1)
    beta = -float(coef[0])
    return beta if math.isfinite(beta) else math.inf


def _certify_mu(p: RadialProfile, t: np.ndarray, floor: np.ndarray,
                t_max: float) -> tuple[float, float] | None:
    """Smallest exponent mu with ``floor >= nu6 (1+t)^(-mu)`` sustainable.

    A candidate mu supports a positive constant exactly when it is at least
    the asymptotic decay rate of the floor, so candidates are screened
    against the extrapolated rate (with half a scan step of slack).  The
    reported nu6 is the minimum of ``floor * (1+t)^mu`` over the full
    sample grid.  Returns (mu, nu6) or None.
    """
    if np.any(floor <= 0.0):
        return None
    beta = _floor_decay_exponent(p, t_max)
    if not math.isfinite(beta):
        return None
    if p.kind in ("phi_mu", "combined"):
        candidates = [p.mu]
    else:
        candidates = [round(m, 2) for m in np.arange(1.05, 6.001, _MU_SCAN_STEP)]
    for mu in candidates:
        if mu >= beta - 0.5 * _MU_SCAN_STEP:
            nu6 = float(np.min(floor * np.exp(mu * np.log1p(t))))
            return float(mu), nu6
    return None


def certify_conditions(p: RadialProfile, t_max: float = 100.0,
                       samples: int = 1000) -> ConditionReport:
    """Check the structural conditions on a sample grid and fit constants.

    Requires ``t_max > 0`` and ``samples >= 100``.  Fitted constants are the
    tightest values valid on the sample; boundedness of the curvature and
    growth quotients is judged by a tail-projection heuristic so that
    profiles whose quotients creep upward without bound are rejected.
    """
    if not (t_max > 0.0):
        raise ValueError("t_max must be positive")
    if samples < 100:
        raise ValueError("samples must be at least 100")
    t = _sample_grid(t_max, samples)
    val = profile_eval(p, t)
    d1 = profile_d1(p, t)
    d2 = profile_d2(p, t)

    checks: dict[str, ConditionCheck] = {}

    v0 = float(profile_eval(p, 0.0))
    checks["value_zero_at_origin"] = ConditionCheck(
        "value_zero_at_origin", abs(v0) <= _SIGN_TOL, abs(v0), 0.0)

    s0 = float(profile_d1(p, 0.0))
    checks["slope_zero_at_origin"] = ConditionCheck(
        "slope_zero_at_origin", abs(s0) <= _SIGN_TOL, abs(s0), 0.0)

    worst_d2 = float(np.min(d2))
    k_d2 = int(np.argmin(d2))
    checks["convexity"] = ConditionCheck(
        "convexity", worst_d2 >= -_SIGN_TOL, max(0.0, -worst_d2), float(t[k_d2]))

    # linear-growth sandwich: two-pass fit.  nu3 is the slope at infinity
    # (d1 is non-decreasing so its limit equals the recession slope); nu1 is
    # the smallest chord slope at t >= 1, nu2 mops up what is left below.
    nu3 = recession_slope(p)
    nu4 = max(0.0, float(np.max(val - nu3 * t)))
    big = t >= 1.0
    if np.any(big):
        nu1 = float(np.min(val[big] / t[big]))
    else:
        nu1 = float(d1[-1])
    nu1 = min(nu1, nu3)
    nu2 = max(0.0, float(np.max(nu1 * t - val)))
    # The slope d1 is non-decreasing for a convex profile, so checking it
    # against the analytic recession slope certifies F <= nu3 t + nu4 for
    # every t, not just on the sample.
    slope_peak = max(float(np.max(d1)),
                     float(np.max(profile_d1(p, _ray(t_max)))))
    growth_ok = slope_peak <= nu3 * (1.0 + 1e-9) + 1e-12
    checks["linear_growth_sandwich"] = ConditionCheck(
        "linear_growth_sandwich", nu1 > 0.0 and growth_ok,
        max(0.0, slope_peak - nu3), None,
        note="constants fitted on the sample")

    # curvature decay: d2 <= nu5 / (1+t), and the full upper corridor
    # max(d2, d1/t) <= nu5 / (1+t) used by the Hessian bound.
    ratio = slope_ratio(p, t)
    upper = np.maximum(d2, ratio) * (1.0 + t)
    nu5_d2 = float(np.max(d2 * (1.0 + t)))
    d2_bounded = _bounded_on_ray(lambda tt: profile_d2(p, tt) * (1.0 + tt), t_max)
    checks["curvature_decay"] = ConditionCheck(
        "curvature_decay", d2_bounded and nu5_d2 > 0.0, 0.0,
        float(t[int(np.argmax(d2 * (1.0 + t)))]),
        note=f"d2*(1+t) peak {nu5_d2:.6g}")
    # The corridor tends to the recession slope (d1 (1+t)/t -> nu3 while
    # the curvature part vanishes), so a globally valid constant is at
    # least nu3; boundedness follows from the slope and curvature audits.
    peak = float(np.max(upper))
    nu5 = max(peak, nu3)
    corridor_bounded = d2_bounded and growth_ok
    checks["hessian_upper_corridor"] = ConditionCheck(
        "hessian_upper_corridor", corridor_bounded and nu5 > 0.0, 0.0,
        float(t[int(np.argmax(upper))]),
        note=f"max(d2, d1/t)*(1+t) peak {peak:.6g}, recession floor {nu3:.6g}")

    # mu-ellipticity floor
    floor = _ellipticity_floor(p, t)
    cert = _certify_mu(p, t, floor, t_max)
    if cert is None:
        checks["mu_ellipticity"] = ConditionCheck(
            "mu_ellipticity", False, float(np.min(floor)), None,
            note="no exponent certified the lower bound")
        nu6 = mu_cert = None
    else:
        mu_cert, nu6 = cert
        checks["mu_ellipticity"] = ConditionCheck(
            "mu_ellipticity", nu6 > 0.0, 0.0, None,
            note=f"mu={mu_cert:g}, nu6={nu6:.6g}")

    constants = GrowthConstants(nu1=nu1, nu2=nu2, nu3=nu3, nu4=nu4, nu5=nu5,
                                nu6=nu6, mu_certified=mu_cert)
    return ConditionReport(profile=p, t_max=float(t_max),
                           sample_count=len(t), checks=checks,
                           constants=constants)

"""Command line entry point.

Subcommands:

* ``density-check``: certify the configured density's structural conditions.
* ``solve``: run the delta-continuation solve; write the trace, per-delta
  solution images, and the final solution at full precision as CSV.
* ``moser``: solve, then audit interior boundedness on every rung.
* ``full-report``: all of the above plus a combined summary.

Exit codes: 0 all checks passed; 1 a check failed or a solve did not
converge; 2 malformed configuration or incompatible geometry.  Runs are
deterministic for a fixed config and seed; ``LINGROW_THREADS`` caps the
fan-out over independent per-delta audits (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import ConfigError, RunConfig, load_config
from .energy import FidelityProblem
from .moser import (BallFamily, MoserGeometryError, moser_report,
                    select_radius)
from .pgmio import field_to_csv, write_pgm
from .profiles import certify_conditions
from .solver import (SolverError, SolveTrace, continuation_solve,
                     default_interior_ball, verify_minimality)

__all__ = ["main", "run_main", "cmd_density_check", "cmd_solve", "cmd_moser",
           "cmd_full_report"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2


def _thread_count() -> int:
    raw = os.environ.get("LINGROW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _delta_tag(delta: float) -> str:
    return f"{delta:.6g}".replace(".", "p").replace("-", "m")


def cmd_density_check(cfg: RunConfig, out_dir: str) -> int:
    report = certify_conditions(cfg.require_density(), cfg.density_t_max,
                                cfg.density_samples)
    _write_json(os.path.join(out_dir, "condition_report.json"),
                report.to_dict())
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def _resolve_ball(cfg: RunConfig, problem) -> tuple[BallFamily, float | None]:
    if cfg.ball is not None:
        ball = cfg.ball
        eps0 = None
    elif cfg.ball_auto_x0 is not None:
        if not isinstance(problem, FidelityProblem):
            raise ConfigError("auto ball selection needs a fidelity problem")
        r0, eps0 = select_radius(problem.f, problem.mask, problem.lam,
                                 cfg.ball_auto_x0)
        ball = BallFamily(cfg.ball_auto_x0, r0, n=cfg.ball_n,
                          j_max=cfg.ball_j_max)
    else:
        raise ConfigError("config needs a 'ball' section for this command")
    if not problem.grid.contains_ball(ball.ball(0)):
        raise MoserGeometryError(
            f"ball of radius {ball.r0:g} at {ball.center} is not strictly "
            "inside the domain")
    return ball, eps0


def _run_solve(cfg: RunConfig, ball=None) -> SolveTrace:
    problem = cfg.require_problem()
    interior = ball.limit_ball() if ball is not None else None
    return continuation_solve(problem, cfg.solver, interior_ball=interior)


def _write_trace(cfg: RunConfig, trace: SolveTrace, out_dir: str) -> dict:
    with open(os.path.join(out_dir, "trace.csv"), "w", newline="\n") as fh:
        fh.write(trace.to_csv())
    problem = cfg.require_problem()
    entries = []
    for rec in trace.records:
        lo = float(rec.u.values.min())
        hi = float(rec.u.values.max())
        if hi <= lo:
            hi = lo + 1.0
        name = f"solution_{_delta_tag(rec.delta)}.pgm"
        if rec.u.channels == 1:
            write_pgm(os.path.join(out_dir, name), rec.u, lo, hi)
        entries.append({
            "delta": rec.delta, "energy": rec.energy,
            "plain_energy": rec.plain_energy, "residual": rec.residual,
            "iters": rec.iters, "tv": rec.tv,
            "interior_sup": rec.interior_sup,
            "pgm": name if rec.u.channels == 1 else None,
            "pgm_lo": lo, "pgm_hi": hi,
        })
    final = trace.final
    field_to_csv(os.path.join(out_dir, "solution_final.csv"), final.u)
    from .energy import RegularizationState
    reg = RegularizationState(final.delta, cfg.solver.mu, problem.kind)
    audit = verify_minimality(problem, reg, final.u,
                              trials=cfg.minimality_trials, seed=cfg.seed)
    payload = {"records": entries, "minimality": audit.to_dict()}
    _write_json(os.path.join(out_dir, "trace.json"), payload)
    return payload


def cmd_solve(cfg: RunConfig, out_dir: str) -> int:
    try:
        trace = _run_solve(cfg)
    except SolverError as err:
        _write_json(os.path.join(out_dir, "trace.json"),
                    {"error": str(err)})
        return EXIT_CHECK_FAILED
    payload = _write_trace(cfg, trace, out_dir)
    ok = payload["minimality"]["passed"]
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _moser_payload(cfg: RunConfig, trace: SolveTrace, out_dir: str) -> dict:
    problem = cfg.require_problem()
    ball, eps0 = _resolve_ball(cfg, problem)

    def audit(rec):
        return moser_report(rec.u, ball, s_values=cfg.s_values, epsilon0=eps0)

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        reports = list(pool.map(audit, trace.records))

    sup_lines = ["delta,interior_sup"]
    all_passed = True
    for rec, rep in zip(trace.records, reports):
        tag = _delta_tag(rec.delta)
        _write_json(os.path.join(out_dir, f"moser_{tag}.json"), rep.to_dict())
        with open(os.path.join(out_dir, f"moser_{tag}.csv"), "w",
                  newline="\n") as fh:
            fh.write(rep.to_csv())
        sup_lines.append(f"{rec.delta!r},{rep.bound.observed!r}")
        all_passed = all_passed and rep.passed
    with open(os.path.join(out_dir, "sup_vs_delta.csv"), "w",
              newline="\n") as fh:
        fh.write("\n".join(sup_lines) + "\n")
    return {"passed": all_passed,
            "ball": {"center": list(ball.center), "r0": ball.r0,
                     "n": ball.n, "j_max": ball.j_max, "epsilon0": eps0},
            "reports": [r.to_dict() for r in reports]}


def cmd_moser(cfg: RunConfig, out_dir: str) -> int:
    problem = cfg.require_problem()
    ball, _ = _resolve_ball(cfg, problem)
    try:
        trace = _run_solve(cfg, ball=ball)
    except SolverError:
        return EXIT_CHECK_FAILED
    payload = _moser_payload(cfg, trace, out_dir)
    _write_json(os.path.join(out_dir, "moser_summary.json"),
                {"passed": payload["passed"], "ball": payload["ball"]})
    return EXIT_OK if payload["passed"] else EXIT_CHECK_FAILED


def cmd_full_report(cfg: RunConfig, out_dir: str) -> int:
    density_report = certify_conditions(cfg.require_density(),
                                        cfg.density_t_max,
                                        cfg.density_samples)
    _write_json(os.path.join(out_dir, "condition_report.json"),
                density_report.to_dict())
    problem = cfg.require_problem()
    ball, _ = _resolve_ball(cfg, problem)
    try:
        trace = _run_solve(cfg, ball=ball)
    except SolverError as err:
        _write_json(os.path.join(out_dir, "report.json"),
                    {"error": str(err), "density_passed":
                     density_report.all_passed})
        return EXIT_CHECK_FAILED
    trace_payload = _write_trace(cfg, trace, out_dir)
    moser_payload = _moser_payload(cfg, trace, out_dir)
    ok = (density_report.all_passed and trace_payload["minimality"]["passed"]
          and moser_payload["passed"])
    _write_json(os.path.join(out_dir, "report.json"), {
        "density_passed": density_report.all_passed,
        "minimality_passed": trace_payload["minimality"]["passed"],
        "moser_passed": moser_payload["passed"],
        "ball": moser_payload["ball"],
        "passed": ok,
    })
    return EXIT_OK if ok else EXIT_CHECK_FAILED


_COMMANDS = {
    "density-check": cmd_density_check,
    "solve": cmd_solve,
    "moser": cmd_moser,
    "full-report": cmd_full_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lingrow",
        description="linear-growth energy minimization and "
                    "interior-boundedness audits")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, seed_override=args.seed)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out)
    except (ConfigError, MoserGeometryError) as err:
        print(f"lingrow: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except SolverError as err:
        print(f"lingrow: {err}", file=sys.stderr)
        return EXIT_CHECK_FAILED


def run_main() -> None:
    sys.exit(main())

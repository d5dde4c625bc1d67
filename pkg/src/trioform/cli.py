"""Command-line entry point ``trioform``.

Configuration is a flat JSON object whose keys carry their units, e.g.
``theta_star_deg`` or ``Kd_per_len2_time``. Unknown keys are rejected.
Angles are degrees on the command line and in files, radians internally.

Exit codes:
    simulate: 0 desired, 2 moving, 3 collision, 4 undecided.
    gains / analyze: 0 condition satisfied, 5 violated, 6 not isosceles.
    any command: 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

from .analysis.certificate import gain_certificate, roots_report
from .analysis.cubic import cubic_f_roots, solve_reduced_cubic_positive, threshold_distance
from .analysis.search import equilibrium_zeros, moving_region_zeros
from .control import Gains
from .errors import FormationError, NotIsosceles
from .geometry import FormationSpec, signed_area
from .simulate import SimParams, simulate
from .sweep import (
    FIG1_DS,
    FIG1_THETAS,
    ISO_ELLS,
    ISO_RADS,
    ISO_THETAS,
    SWEEP_SIM,
    SweepPlan,
    fig1_grid,
    general_triangle_experiment,
    json_safe,
    monotone_violations,
    run_sweep,
    sample_initial,
    sweep_summary,
    write_fig1_csv,
    write_json,
    write_sweep_csv,
)

EXIT_ERROR = 1
EXIT_VIOLATED = 5
EXIT_NOT_ISOSCELES = 6


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class RunConfig:
    # formation
    d12_star_len: float = 10.0
    d13_star_len: float | None = None  # defaults to d12_star_len
    theta_star_deg: float = 60.0
    # gains: give either KA_per_len2_time or RAd_ratio
    Kd_per_len2_time: float = 3.0
    Kb_len_per_time: float = 48.0
    KA_per_len2_time: float | None = None
    RAd_ratio: float | None = None
    # integration
    dt_time: float = SimParams.dt
    t_max_time: float = SimParams.t_max
    conv_window_steps: int = SimParams.conv_window
    eq_velocity_tol_len_per_time: float = SimParams.eq_velocity_tol
    moving_residual_tol_len_per_time: float = SimParams.moving_residual_tol
    error_tol_dimless: float = SimParams.error_tol
    stability_factor_dimless: float = SimParams.stability_factor
    moving_drift_rtol_dimless: float = SimParams.moving_drift_rtol
    max_steps: int = SimParams.max_steps
    record_stride_steps: int = SimParams.record_stride
    collision_eps_len: float = SimParams.collision_eps
    # initial condition for simulate: explicit p0, else sampled
    p0_len: list | None = None
    seed: int = 0
    seed_index: int = 0
    init_box_len: float = 100.0
    min_separation_len: float = 1.0
    # sweep (iso mode)
    ell_values_len: list | None = None
    theta_values_deg: list | None = None
    RAd_values: list | None = None
    n_seeds: int = 200
    sweep_t_max_time: float = SWEEP_SIM.t_max
    # sweep (fig1 mode)
    fig1_theta_values_deg: list | None = None
    fig1_d_values: list | None = None
    fig1_x_range: list | None = None  # [start, stop, step]
    # sweep (general mode)
    general_d12_star_len: float = 10.0
    general_d13_star_len: float = 15.0
    general_theta_deg: float = 60.0
    general_RAd_values: list | None = None
    # analyze
    search_y_max: float = 5.0

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg._validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> RunConfig:
        if path is None:
            return cls()
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_mapping(data)

    def _validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type in ("float", "float | None") and v is not None:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"{f.name} must be a number")
                if not math.isfinite(v):
                    raise ConfigError(f"{f.name} must be finite")
            if f.type == "int" and (isinstance(v, bool) or not isinstance(v, int)):
                raise ConfigError(f"{f.name} must be an integer")
            if f.type == "list | None" and v is not None and not isinstance(v, list):
                raise ConfigError(f"{f.name} must be a list")
        if self.KA_per_len2_time is not None and self.RAd_ratio is not None:
            raise ConfigError("give only one of KA_per_len2_time and RAd_ratio")
        if self.p0_len is not None:
            ok = len(self.p0_len) == 3 and all(
                isinstance(r, list) and len(r) == 2 and all(_is_num(v) for v in r)
                for r in self.p0_len
            )
            if not ok:
                raise ConfigError("p0_len must be [[x1, y1], [x2, y2], [x3, y3]]")
        if self.fig1_x_range is not None and len(self.fig1_x_range) != 3:
            raise ConfigError("fig1_x_range must be [start, stop, step]")

    def spec(self) -> FormationSpec:
        d13 = self.d12_star_len if self.d13_star_len is None else self.d13_star_len
        return FormationSpec.from_angle(self.d12_star_len, d13, self.theta_star_deg)

    def gains(self) -> Gains:
        if self.KA_per_len2_time is not None:
            return Gains(self.Kd_per_len2_time, self.Kb_len_per_time, self.KA_per_len2_time)
        rad = 1.0 if self.RAd_ratio is None else self.RAd_ratio
        return Gains.from_ratio(self.Kd_per_len2_time, self.Kb_len_per_time, rad)

    def sim(self, t_max: float | None = None) -> SimParams:
        return SimParams(
            dt=self.dt_time,
            t_max=self.t_max_time if t_max is None else t_max,
            conv_window=self.conv_window_steps,
            eq_velocity_tol=self.eq_velocity_tol_len_per_time,
            moving_residual_tol=self.moving_residual_tol_len_per_time,
            error_tol=self.error_tol_dimless,
            stability_factor=self.stability_factor_dimless,
            moving_drift_rtol=self.moving_drift_rtol_dimless,
            max_steps=self.max_steps,
            record_stride=self.record_stride_steps,
            collision_eps=self.collision_eps_len,
        )


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = RunConfig.load(args.config)
    spec, gains, params = cfg.spec(), cfg.gains(), cfg.sim()
    if args.seed is not None:
        p0 = sample_initial(args.seed, cfg.seed_index, cfg.init_box_len, cfg.min_separation_len)
    elif cfg.p0_len is not None:
        p0 = cfg.p0_len
    else:
        p0 = sample_initial(cfg.seed, cfg.seed_index, cfg.init_box_len, cfg.min_separation_len)
    traj, outcome = simulate(p0, spec, gains, params)
    out = _out_dir(args)
    traj.to_csv(out / "trajectory.csv")
    final = outcome.final_config
    report = {
        "outcome": outcome.kind.value,
        "exit_code": outcome.kind.exit_code,
        "t_end": outcome.t_end,
        "n_steps": outcome.n_steps,
        "step_retries": outcome.step_retries,
        "final_error_norm": outcome.final_error_norm,
        "steady_velocity": outcome.steady_velocity.tolist(),
        "expected_moving_velocity": (gains.K_b * (spec.g12_star + spec.g13_star)).tolist(),
        "final_signed_area": signed_area(final),
        "final_config": final.tolist(),
        "p0": [list(map(float, r)) for r in p0],
        "R_Ad": gains.R_Ad,
        "d_hat": gains.d_hat,
    }
    write_json(json_safe(report), out / "outcome.json")
    print(f"{outcome.kind.value} at t={outcome.t_end:.6g}")
    return outcome.kind.exit_code


def cmd_sweep(args) -> int:
    cfg = RunConfig.load(args.config)
    out = _out_dir(args)
    seed = cfg.seed if args.seed is None else args.seed
    n_seeds = cfg.n_seeds if args.n_seeds is None else args.n_seeds
    base = Gains(cfg.Kd_per_len2_time, cfg.Kb_len_per_time, cfg.Kd_per_len2_time)
    sim = cfg.sim(t_max=cfg.sweep_t_max_time)
    if args.mode == "fig1":
        x_range = tuple(cfg.fig1_x_range) if cfg.fig1_x_range else (1.0, 30.0, 0.1)
        thetas = cfg.fig1_theta_values_deg or FIG1_THETAS
        rows = fig1_grid(thetas, cfg.fig1_d_values or FIG1_DS, x_range)
        write_fig1_csv(rows, out / "fig1.csv")
        per_theta = {}
        for th in thetas:
            gaps = [r.gap for r in rows if r.theta_deg == float(th)]
            per_theta[repr(float(th))] = {
                "points": len(gaps),
                "min_gap": min(gaps) if gaps else None,
                "all_positive": all(g > 0 for g in gaps),
            }
        write_json(json_safe({"mode": "fig1", "rows": len(rows), "per_theta": per_theta}), out / "summary.json")
        print(f"fig1: {len(rows)} feasible points")
        return 0
    if args.mode == "general":
        result = general_triangle_experiment(
            cfg.general_d12_star_len,
            cfg.general_d13_star_len,
            cfg.general_theta_deg,
            cfg.general_RAd_values or (0.2, 1.0),
            n_seeds,
            seed,
            gains_base=base,
            sim=sim,
        )
        mono: list[str] = []
    else:
        plan = SweepPlan(
            ell_values=cfg.ell_values_len or ISO_ELLS,
            theta_values=cfg.theta_values_deg or ISO_THETAS,
            RAd_values=cfg.RAd_values or ISO_RADS,
            gains_base=base,
            n_seeds=n_seeds,
            seed=seed,
            init_box=cfg.init_box_len,
            sim=sim,
            min_separation=cfg.min_separation_len,
        )
        result = run_sweep(plan)
        mono = monotone_violations(result)
    write_sweep_csv(result, out / "sweep.csv")
    summary = sweep_summary(result, mono)
    summary["mode"] = args.mode
    write_json(summary, out / "summary.json")
    for c in result.cells:
        t = c.tallies
        print(
            f"ell={c.cell.ell:g} d13={c.cell.d13_star:g} theta={c.cell.theta_deg:g} "
            f"R_Ad={c.cell.RAd:.6g}: desired={t['desired']} moving={t['moving']} "
            f"collision={t['collision']} undecided={t['undecided']}"
        )
    return 0


def _certificate(cfg: RunConfig):
    spec, gains = cfg.spec(), cfg.gains()
    return spec, gains, gain_certificate(spec, gains)


def cmd_gains(args) -> int:
    cfg = RunConfig.load(args.config)
    spec, gains, cert = _certificate(cfg)
    out = _out_dir(args)
    write_json(json_safe(cert.to_dict()), out / "certificate.json")
    print(f"{cert.clause}: {'satisfied' if cert.satisfied else 'violated'} (d_hat={cert.d_hat!r})")
    return 0 if cert.satisfied else EXIT_VIOLATED


def cmd_analyze(args) -> int:
    cfg = RunConfig.load(args.config)
    spec, gains, cert = _certificate(cfg)
    eq = equilibrium_zeros(gains.R_Ad, spec.theta_star)
    undesired = eq.without((1.0, 1.0))
    mv = moving_region_zeros(spec.d12_star, gains.R_bd, gains.R_Ad, spec.theta_star, cfg.search_y_max)
    mv_zeros = [] if mv is None else mv.zeros.tolist()
    report = {
        "clause": cert.clause,
        "bounds": {"lower": cert.required_RAd_lower, "upper": cert.required_RAd_upper},
        "satisfied": cert.satisfied,
        "roots": roots_report(spec.d12_star, gains.R_bd),
        "search_summary": {
            "cells": eq.cells + (0 if mv is None else mv.cells),
            "zeros_found": len(undesired) + len(mv_zeros),
            "undesired_equilibria": undesired.tolist(),
            "moving_configurations": mv_zeros,
        },
        "certificate": cert.to_dict(),
    }
    out = _out_dir(args)
    write_json(json_safe(report), out / "analyze.json")
    print(
        f"{cert.clause}: {'satisfied' if cert.satisfied else 'violated'}; "
        f"undesired zeros found: {report['search_summary']['zeros_found']}"
    )
    return 0 if cert.satisfied else EXIT_VIOLATED


def cmd_cubic(args) -> int:
    if args.ell is not None:
        if args.R_bd is None:
            raise ConfigError("--ell needs --R-bd")
        fr = cubic_f_roots(args.ell, args.R_bd)
        report = {
            "ell": args.ell,
            "R_bd": args.R_bd,
            "d_hat": threshold_distance(args.R_bd),
            "r1": None if fr is None else fr.r1,
            "r2": None if fr is None else fr.r2,
            "phi_deg": None if fr is None else math.degrees(fr.phi),
        }
    elif args.c is not None and args.d is not None:
        r = solve_reduced_cubic_positive(args.c, args.d)
        report = {"c": args.c, "d": args.d, "y_p1": r.y_p1, "y_p2": r.y_p2, "r_v": r.r_v, "phi_v_deg": r.phi_v_deg}
    else:
        raise ConfigError("give either --c and --d, or --ell and --R-bd")
    text = json.dumps(json_safe(report), indent=2)
    if args.out:
        out = _out_dir(args)
        (out / "cubic.json").write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trioform", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="trioform-out"):
        sp.add_argument("--config", metavar="PATH", help="flat JSON config with unit-suffixed keys")
        sp.add_argument("--out", metavar="DIR", default=out_default, help="output directory")

    sp = sub.add_parser("simulate", help="integrate one run and classify it")
    common(sp)
    sp.add_argument("--seed", type=int, help="sample p0 from this seed (overrides p0_len)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="random-start sweeps or the equilibrium-gap grid")
    common(sp)
    sp.add_argument("--mode", choices=("iso", "fig1", "general"), default="iso")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n-seeds", type=int, dest="n_seeds")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gains", help="gain-ratio certificate")
    common(sp)
    sp.set_defaults(func=cmd_gains)

    sp = sub.add_parser("analyze", help="certificate plus roots and zero searches")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("cubic", help="reduced-cubic roots")
    sp.add_argument("--c", type=float)
    sp.add_argument("--d", type=float)
    sp.add_argument("--ell", type=float)
    sp.add_argument("--R-bd", type=float, dest="R_bd")
    sp.add_argument("--out", metavar="DIR")
    sp.set_defaults(func=cmd_cubic)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "n_seeds", None) is not None and args.n_seeds < 1:
        print("error: --n-seeds must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except NotIsosceles as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_ISOSCELES
    except (ConfigError, FormationError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

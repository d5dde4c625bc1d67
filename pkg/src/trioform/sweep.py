"""Batch experiments: random-start sweeps, the equilibrium-gap grid and CSV/JSON output.

Initial conditions are drawn per run from ``numpy.random.PCG64`` seeded with
``plan.seed ^ seed_index``. Every cell of a sweep therefore sees the same
list of starting configurations, which makes cells directly comparable.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .analysis.certificate import gain_certificate
from .analysis.isosceles import evaluate_eq18_gap, eq18_point
from .control import Gains
from .errors import DomainError, NotFeasible, NotIsosceles
from .geometry import FormationSpec
from .simulate import OutcomeKind, SimParams, simulate

SWEEP_HEADER = (
    "ell",
    "theta_deg",
    "RAd",
    "seed_index",
    "outcome",
    "final_error",
    "steady_vx",
    "steady_vy",
    "t_end",
)
FIG1_HEADER = ("theta_deg", "d_param", "x_bar", "y_bar", "gap")
RNG_NOTE = "numpy PCG64; run seed = plan seed XOR seed_index; rejection of pairwise distance < min_separation"

ISO_ELLS = (3.0, 6.0, 10.0)
ISO_THETAS = (5.0, 10.0, 30.0, 60.0, 90.0, 120.0, 150.0)
ISO_RADS: tuple[Union[float, str], ...] = (
    0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 3.0, 6.0, 10.0, 20.0, 50.0,
    "2/(1-cos)", "2/(1+cos)", "6/(1+cos)",
)  # fmt: skip
EQUILATERAL_ELLS = (3.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 25.0, 50.0, 75.0, 100.0)
EQUILATERAL_RADS = (0.25, 0.5, 0.75, 1.0, 2.0, 4.0)
FIG1_THETAS = (5.0, 15.0, 45.0, 75.0)
FIG1_DS = (3.1, 4.0, 6.0, 11.0, 16.0, 26.0, 51.0, 101.0, 501.0, 1001.0)

# Sweeps integrate longer than a single default run: the slowest starts
# near small vertex angles need roughly t = 100 to settle.
SWEEP_SIM = SimParams(t_max=200.0)

_SYMBOLIC = {
    "2/(1-cos)": lambda c: 2.0 / (1.0 - c),
    "2/(1+cos)": lambda c: 2.0 / (1.0 + c),
    "6/(1+cos)": lambda c: 6.0 / (1.0 + c),
}

RAdValue = Union[float, str]


def resolve_rad(value: RAdValue, theta_deg: float) -> float:
    """Turn a numeric or symbolic gain ratio (``"2/(1-cos)"`` etc.) into a float."""
    if isinstance(value, str):
        key = value.replace(" ", "")
        if key not in _SYMBOLIC:
            raise DomainError(f"unknown symbolic R_Ad {value!r}; use one of {sorted(_SYMBOLIC)}")
        return _SYMBOLIC[key](math.cos(math.radians(theta_deg)))
    v = float(value)
    if not v > 0:
        raise DomainError(f"R_Ad must be positive, got {v}")
    return v


@dataclass(frozen=True)
class SweepPlan:
    """Grid of formations and gain ratios, each run from ``n_seeds`` random starts.

    ``d13_values`` pairs element-wise with ``ell_values`` for general
    triangles; leave it ``None`` for isosceles cells.
    """

    ell_values: Sequence[float] = ISO_ELLS
    theta_values: Sequence[float] = ISO_THETAS  # degrees
    RAd_values: Sequence[RAdValue] = ISO_RADS
    gains_base: Gains = Gains(3.0, 48.0, 3.0)
    n_seeds: int = 200
    seed: int = 0
    init_box: float = 100.0
    sim: SimParams = SWEEP_SIM
    min_separation: float = 1.0
    d13_values: Sequence[float] | None = None

    def __post_init__(self) -> None:
        if self.n_seeds < 1:
            raise DomainError("n_seeds must be at least 1")
        if not self.init_box > 0:
            raise DomainError("init_box must be positive")
        if not (self.ell_values and self.theta_values and self.RAd_values):
            raise DomainError("sweep grids must be nonempty")
        if self.d13_values is not None and len(self.d13_values) != len(self.ell_values):
            raise DomainError("d13_values must pair with ell_values")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        if not 0 <= self.min_separation < self.init_box:
            raise DomainError("min_separation must lie in [0, init_box)")

    def cells(self) -> list[Cell]:
        out = []
        d13s = self.d13_values if self.d13_values is not None else self.ell_values
        for ell, d13 in zip(self.ell_values, d13s):
            for th in self.theta_values:
                for rad in self.RAd_values:
                    out.append(Cell(float(ell), float(d13), float(th), rad, resolve_rad(rad, th)))
        return out


@dataclass(frozen=True)
class Cell:
    ell: float
    d13_star: float
    theta_deg: float
    RAd_label: RAdValue
    RAd: float

    def spec(self) -> FormationSpec:
        return FormationSpec.from_angle(self.ell, self.d13_star, self.theta_deg)


@dataclass(frozen=True)
class RunRecord:
    cell: int
    ell: float
    theta_deg: float
    RAd: float
    seed_index: int
    outcome: OutcomeKind
    final_error: float
    steady_vx: float
    steady_vy: float
    t_end: float


@dataclass
class CellResult:
    cell: Cell
    tallies: dict[str, int]
    certificate: dict | None

    @property
    def moving(self) -> int:
        return self.tallies["moving"]


@dataclass
class SweepResult:
    plan: SweepPlan
    cells: list[CellResult]
    records: list[RunRecord] = field(repr=False)

    def cell(self, ell: float, theta_deg: float, RAd: float) -> CellResult:
        for c in self.cells:
            if (
                math.isclose(c.cell.ell, ell)
                and math.isclose(c.cell.theta_deg, theta_deg)
                and math.isclose(c.cell.RAd, RAd)
            ):
                return c
        raise KeyError((ell, theta_deg, RAd))


_TALLY_KEY = {
    OutcomeKind.DESIRED: "desired",
    OutcomeKind.MOVING: "moving",
    OutcomeKind.COLLISION: "collision",
    OutcomeKind.UNDECIDED: "undecided",
}


def sample_initial(
    seed: int, seed_index: int, init_box: float = 100.0, min_separation: float = 1.0
) -> np.ndarray:
    """Uniform start in ``[-init_box, init_box]^2`` per robot, resampled on near-collisions."""
    rng = np.random.Generator(np.random.PCG64(int(seed) ^ int(seed_index)))
    while True:
        p = rng.uniform(-init_box, init_box, size=(3, 2))
        d = (
            np.linalg.norm(p[0] - p[1]),
            np.linalg.norm(p[0] - p[2]),
            np.linalg.norm(p[1] - p[2]),
        )
        if min(d) >= min_separation:
            return p


def _thread_count() -> int:
    env = os.environ.get("TRIO_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError(f"TRIO_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def run_sweep(plan: SweepPlan, threads: int | None = None) -> SweepResult:
    """Simulate every cell of ``plan`` and tally the outcomes.

    Runs are independent and execute on a thread pool (the integrator
    releases the GIL); results are keyed by index so the output does not
    depend on scheduling.
    """
    cells = plan.cells()
    starts = [
        sample_initial(plan.seed, i, plan.init_box, plan.min_separation) for i in range(plan.n_seeds)
    ]
    jobs = [(ci, si) for ci in range(len(cells)) for si in range(plan.n_seeds)]
    specs = [c.spec() for c in cells]
    gains = [Gains.from_ratio(plan.gains_base.K_d, plan.gains_base.K_b, c.RAd) for c in cells]

    def work(job: tuple[int, int]) -> RunRecord:
        ci, si = job
        c = cells[ci]
        _, o = simulate(starts[si], specs[ci], gains[ci], plan.sim, record=False)
        return RunRecord(
            cell=ci,
            ell=c.ell,
            theta_deg=c.theta_deg,
            RAd=c.RAd,
            seed_index=si,
            outcome=o.kind,
            final_error=o.final_error_norm,
            steady_vx=float(o.steady_velocity[0]),
            steady_vy=float(o.steady_velocity[1]),
            t_end=o.t_end,
        )

    n = min(threads or _thread_count(), len(jobs))
    if n <= 1:
        records = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            records = list(ex.map(work, jobs))

    results = []
    for ci, c in enumerate(cells):
        tallies = {"desired": 0, "moving": 0, "collision": 0, "undecided": 0}
        for r in records[ci * plan.n_seeds : (ci + 1) * plan.n_seeds]:
            tallies[_TALLY_KEY[r.outcome]] += 1
        try:
            cert = gain_certificate(specs[ci], gains[ci]).to_dict()
        except NotIsosceles:
            cert = None
        results.append(CellResult(c, tallies, cert))
    return SweepResult(plan, results, records)


def general_triangle_experiment(
    d12_star: float = 10.0,
    d13_star: float = 15.0,
    theta_star: float = 60.0,
    RAd_values: Sequence[RAdValue] = (0.2, 1.0),
    n_seeds: int = 200,
    seed: int = 0,
    *,
    gains_base: Gains = Gains(3.0, 48.0, 3.0),
    sim: SimParams = SWEEP_SIM,
    threads: int | None = None,
) -> SweepResult:
    """Sweep a single non-isosceles triangle (``theta_star`` in degrees)."""
    plan = SweepPlan(
        ell_values=(float(d12_star),),
        d13_values=(float(d13_star),),
        theta_values=(float(theta_star),),
        RAd_values=tuple(RAd_values),
        gains_base=gains_base,
        n_seeds=n_seeds,
        seed=seed,
        sim=sim,
    )
    return run_sweep(plan, threads)


def monotone_violations(result: SweepResult, ell: float = 10.0, theta_deg: float = 60.0) -> list[str]:
    """Places where the moving fraction rises with ``R_Ad`` at fixed ``(ell, theta)``.

    The trend is expected but not guaranteed, so each violation is also
    issued as a :class:`UserWarning` rather than an error.
    """
    rows = sorted(
        (c for c in result.cells
         if math.isclose(c.cell.ell, ell) and math.isclose(c.cell.theta_deg, theta_deg)
         and math.isclose(c.cell.d13_star, ell)),
        key=lambda c: c.cell.RAd,
    )  # fmt: skip
    out = []
    for lo, hi in zip(rows, rows[1:]):
        if hi.moving > lo.moving:
            msg = (
                f"moving count rises from {lo.moving} at R_Ad={lo.cell.RAd:g} "
                f"to {hi.moving} at R_Ad={hi.cell.RAd:g} (ell={ell:g}, theta={theta_deg:g})"
            )
            warnings.warn(msg, stacklevel=2)
            out.append(msg)
    return out


@dataclass(frozen=True)
class Fig1Row:
    theta_deg: float
    d_param: float
    x_bar: float
    y_bar: float
    gap: float


def fig1_grid(
    theta_values: Iterable[float] = FIG1_THETAS,
    d_values: Iterable[float] = FIG1_DS,
    x_range: tuple[float, float, float] = (1.0, 30.0, 0.1),
) -> list[Fig1Row]:
    """Equilibrium gap on the lower branch over ``(theta, d, x_bar)``; infeasible points are skipped.

    ``x_range`` is ``(start, stop, step)`` with both ends excluded.
    """
    lo, hi, step = x_range
    n = int(round((hi - lo) / step))
    xs = [round(lo + k * step, 12) for k in range(1, n)]
    rows = []
    for th in theta_values:
        rad = math.radians(th)
        for d in d_values:
            if not d > 3:
                raise DomainError(f"d_param must exceed 3, got {d}")
            for x in xs:
                try:
                    _, y = eq18_point(x, d, rad)
                    gap = evaluate_eq18_gap(x, d, rad)
                except NotFeasible:
                    continue
                rows.append(Fig1Row(float(th), float(d), x, y, gap))
    return rows


def _f(v: float) -> str:
    return repr(float(v))


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    """One row per run. For general triangles the ``ell`` column holds ``d12_star``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in result.records:
            w.writerow(
                [
                    _f(r.ell),
                    _f(r.theta_deg),
                    _f(r.RAd),
                    r.seed_index,
                    r.outcome.value,
                    _f(r.final_error),
                    _f(r.steady_vx),
                    _f(r.steady_vy),
                    _f(r.t_end),
                ]
            )


def write_fig1_csv(rows: Sequence[Fig1Row], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIG1_HEADER)
        for r in rows:
            w.writerow([_f(r.theta_deg), _f(r.d_param), _f(r.x_bar), _f(r.y_bar), _f(r.gap)])


def json_safe(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj


def sweep_summary(result: SweepResult, monotone: Sequence[str] = ()) -> dict:
    plan = result.plan
    return json_safe(
        {
            "rng": RNG_NOTE,
            "plan": {
                "n_seeds": plan.n_seeds,
                "seed": plan.seed,
                "init_box": plan.init_box,
                "min_separation": plan.min_separation,
                "gains_base": {"K_d": plan.gains_base.K_d, "K_b": plan.gains_base.K_b},
                "sim": asdict(plan.sim),
            },
            "cells": [
                {
                    "ell": c.cell.ell,
                    "d13_star": c.cell.d13_star,
                    "theta_deg": c.cell.theta_deg,
                    "RAd": c.cell.RAd,
                    "RAd_label": c.cell.RAd_label
                    if isinstance(c.cell.RAd_label, str)
                    else float(c.cell.RAd_label),
                    "tallies": c.tallies,
                    "certificate": c.certificate,
                }
                for c in result.cells
            ],
            "monotone_warnings": list(monotone),
        }
    )


def write_json(obj: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


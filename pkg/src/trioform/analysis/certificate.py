"""Gain-ratio conditions for convergence to an isosceles formation.

Three verdicts are reported side by side:

* ``satisfied``: the working condition. Acute formations use the condition
  extended by the grid evaluation of the equilibrium gap; right and obtuse
  formations use the proven bound.
* ``theory_satisfied``: the purely analytic condition. For acute formations
  with ``ell > d_hat`` this only holds at ``R_Ad = 6/(1 + cos)`` with the
  vertex angle in [60, 90) degrees.
* ``note``: free text pointing at simulation evidence where it differs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..control import Gains
from ..geometry import FormationSpec
from .cubic import cubic_f_roots, threshold_distance
from .isosceles import IsoscelesCase, Regime

# Relative tolerance for comparisons against d_hat and closed-form bounds.
REL_TOL = 1e-12
# Bounds above this are reported as degenerate (vertex angle near 0 or 180 degrees).
DEGENERATE_BOUND = 1e12

CLAUSE_SMALL_ANY = "ell<=d_hat: any R_Ad > 0"
CLAUSE_SMALL_ACUTE_THEORY = "ell<=d_hat, acute, theory: R_Ad <= 6/(1+cos)"
CLAUSE_LARGE_ACUTE = "ell>d_hat, acute, with numerics: R_Ad >= max(6/(1+cos), 2/(1-cos))"
CLAUSE_LARGE_ACUTE_THEORY = "ell>d_hat, acute, theory: R_Ad = 6/(1+cos), theta in [60, 90)"
CLAUSE_LARGE_RIGHT_OBTUSE = "ell>d_hat, right/obtuse: R_Ad >= 2/(1+cos)"


@dataclass(frozen=True)
class GainCertificate:
    ell: float
    theta_deg: float
    regime: str
    R_Ad: float
    d_hat: float
    ell_le_dhat: bool
    clause: str
    required_RAd_lower: float | None
    required_RAd_upper: float | None
    satisfied: bool
    theory_clause: str
    theory_RAd_lower: float | None
    theory_RAd_upper: float | None
    theory_satisfied: bool
    degenerate: bool
    note: str

    def to_dict(self) -> dict:
        return asdict(self)


def _safe_div(num: float, den: float) -> float:
    return math.inf if den <= 0 else num / den


def _in_interval(v: float, lo: float | None, hi: float | None) -> bool:
    if lo is not None and v < lo * (1.0 - REL_TOL):
        return False
    if hi is not None and v > hi * (1.0 + REL_TOL):
        return False
    return True


def gain_certificate(spec: FormationSpec, gains: Gains) -> GainCertificate:
    """Evaluate the gain-ratio conditions for an isosceles ``spec``.

    Raises:
        NotIsosceles: if ``d12_star != d13_star``.
    """
    case = IsoscelesCase.from_spec(spec)
    ell = case.ell
    co = math.cos(case.theta_star)
    R = gains.R_Ad
    d_hat = threshold_distance(gains.R_bd)
    small = ell <= d_hat * (1.0 + REL_TOL)
    regime = case.regime
    upper6 = _safe_div(6.0, 1.0 + co)
    note = ""

    if small:
        clause, lo, hi = CLAUSE_SMALL_ANY, None, None
        if regime is Regime.ACUTE:
            t_clause, t_lo, t_hi = CLAUSE_SMALL_ACUTE_THEORY, None, upper6
        else:
            t_clause, t_lo, t_hi = CLAUSE_SMALL_ANY, None, None
        t_ok = _in_interval(R, t_lo, t_hi)
        degenerate = False
    elif regime is Regime.ACUTE:
        lo = max(upper6, _safe_div(2.0, 1.0 - co))
        clause, hi = CLAUSE_LARGE_ACUTE, None
        t_clause = CLAUSE_LARGE_ACUTE_THEORY
        theta_deg = math.degrees(case.theta_star)
        if theta_deg >= 60.0 - 1e-9:
            t_lo = t_hi = upper6
            t_ok = math.isclose(R, upper6, rel_tol=1e-9)
        else:
            t_lo = t_hi = None
            t_ok = False
        degenerate = lo > DEGENERATE_BOUND
    else:
        lo = _safe_div(2.0, 1.0 + co)
        clause, hi = CLAUSE_LARGE_RIGHT_OBTUSE, None
        t_clause, t_lo, t_hi = clause, lo, None
        t_ok = _in_interval(R, lo, None)
        degenerate = lo > DEGENERATE_BOUND

    ok = _in_interval(R, lo, hi)
    if not small and not ok and not degenerate:
        note = (
            "below the proven bound, which is sufficient but not sharp; random-start "
            "simulations (K_d=3, K_b=48) show only desired outcomes from R_Ad = 1 upward"
        )
    elif small and not t_ok:
        note = "outside the analytic interval but covered by the grid evaluation of the equilibrium gap"
    if degenerate:
        note = (note + "; " if note else "") + "vertex angle near the limit where the bound diverges"

    return GainCertificate(
        ell=ell,
        theta_deg=math.degrees(case.theta_star),
        regime=regime.value,
        R_Ad=R,
        d_hat=d_hat,
        ell_le_dhat=small,
        clause=clause,
        required_RAd_lower=lo,
        required_RAd_upper=hi,
        satisfied=ok,
        theory_clause=t_clause,
        theory_RAd_lower=t_lo,
        theory_RAd_upper=t_hi,
        theory_satisfied=t_ok,
        degenerate=degenerate,
        note=note,
    )


def roots_report(ell: float, R_bd: float) -> dict:
    """``{r1, r2, d_hat}`` with ``None`` roots below the threshold distance."""
    fr = cubic_f_roots(ell, R_bd)
    return {
        "r1": None if fr is None else fr.r1,
        "r2": None if fr is None else fr.r2,
        "d_hat": threshold_distance(R_bd),
    }

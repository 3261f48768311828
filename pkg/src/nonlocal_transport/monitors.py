"""Pass/fail verdicts for a finished run.

Every monitor looks at the record series (plus, for the J chains, two
integrals evaluated on the live profile at each record) and returns a
:class:`MonitorResult` carrying the extremal measured value.  Monitors whose
hypotheses do not hold for the run are reported as ``not_applicable``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diagnostics import (
    DiagRecord,
    JParams,
    cauchy_schwarz_rhs,
    energy_balance_residual,
    monotonicity_report,
    regular_records,
    riccati_ratios,
)
from .spectral import RealField

__all__ = [
    "MonitorResult",
    "MonitorTolerances",
    "RecordExtras",
    "record_extras",
    "evaluate_monitors",
    "MONITOR_NAMES",
    "PASS",
    "FAIL",
    "NOT_APPLICABLE",
]

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"

MONITOR_NAMES = (
    "max_principle_lower",
    "max_principle_upper",
    "l1_nonincreasing",
    "l2_nonincreasing",
    "dissipation_budget",
    "energy_balance",
    "j_riccati",
    "j_bounding_chain",
    "cauchy_schwarz_chain",
    "dj_consistency",
    "lemma_positivity",
    "hhalf_bounded",
    "h1_linear_growth",
    "h2_finite",
    "hhalf_nonincreasing",
    "run_completed",
)


@dataclass(frozen=True)
class MonitorResult:
    name: str
    status: str
    value: float = math.nan
    limit: float = math.nan
    detail: str = ""

    def as_dict(self) -> dict:
        return {"status": self.status, "value": _finite_or_none(self.value),
                "limit": _finite_or_none(self.limit), "detail": self.detail}


@dataclass(frozen=True)
class MonitorTolerances:
    pointwise: float = 1e-8  # absolute, for min/max of theta
    relative: float = 1e-6  # norm monotonicity, budget, hhalf decay
    energy: float = 1e-5  # energy balance residual / l2_0^2
    dj_consistency: float = 1e-3  # relative mismatch of dJ/dt and dj_rhs
    energy_skip: float = 0.1  # initial layer left out of the energy balance


@dataclass(frozen=True)
class RecordExtras:
    """Integrals that need the profile itself, taken alongside a record."""

    t: float
    cs_rhs: float  # bound_factor * int (m - theta)^2 / x^(2+delta)
    weighted_sq: float  # int (m - theta)^2 / x^(2+delta)


def record_extras(t: float, theta: RealField, p: JParams) -> RecordExtras:
    if not np.any(theta.values != 0):
        return RecordExtras(t, 0.0, 0.0)
    cs = cauchy_schwarz_rhs(theta, p)
    return RecordExtras(t, cs, cs / p.bound_factor)


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _na(name, why):
    return MonitorResult(name, NOT_APPLICABLE, detail=why)


def _verdict(name, ok, value, limit, detail=""):
    return MonitorResult(name, PASS if ok else FAIL, float(value), float(limit), detail)


def evaluate_monitors(records: Sequence[DiagRecord], *, nu: float, alpha: float,
                      record_interval: float, status: str,
                      jparams: Optional[JParams] = None,
                      extras: Sequence[RecordExtras] = (),
                      c_delta: Optional[float] = None,
                      tol: MonitorTolerances = MonitorTolerances()) -> list[MonitorResult]:
    """Evaluate every monitor in :data:`MONITOR_NAMES` order."""
    if not records:
        return [_na(n, "no records") for n in MONITOR_NAMES]
    r0 = records[0]
    t = np.array([r.t for r in records])
    col = {k: np.array([getattr(r, k) for r in records]) for k in DiagRecord.columns()}
    out: list[MonitorResult] = []

    out.append(_verdict("max_principle_lower", col["min_val"].min() >= -tol.pointwise,
                        col["min_val"].min(), -tol.pointwise, "min theta over records"))
    excess = col["linf"].max() - r0.linf
    out.append(_verdict("max_principle_upper", excess <= tol.pointwise, excess, tol.pointwise,
                        "max theta minus initial max"))
    for key in ("l1", "l2"):
        name = f"{key}_nonincreasing"
        if len(records) < 2 or col[key][0] == 0:
            out.append(_na(name, "fewer than two records or zero initial norm"))
            continue
        rise = float(np.max(np.diff(col[key]))) / col[key][0]
        out.append(_verdict(name, rise <= tol.relative, rise, tol.relative,
                            "largest increase between records, relative to initial"))

    if nu > 0:
        budget = r0.l2**2 / (2.0 * nu)
        kinds = {v.kind for v in monotonicity_report(records, nu, tol.pointwise, tol.relative)}
        out.append(_verdict("dissipation_budget", "dissipation_budget" not in kinds,
                            col["cum_diss"].max(), budget * (1.0 + tol.relative)))
    else:
        out.append(_na("dissipation_budget", "nu = 0"))

    reg = regular_records(records, record_interval)
    if len(reg) >= 3 and r0.l2 > 0:
        res = energy_balance_residual(reg, nu, method="simpson") / r0.l2**2
        tmid = np.array([r.t for r in reg[1:-1]])
        keep = tmid >= tol.energy_skip
        if np.any(keep):
            worst = float(res[keep].max())
            out.append(_verdict("energy_balance", worst <= tol.energy, worst, tol.energy,
                                f"max Simpson residual / l2_0^2, t >= {tol.energy_skip:g}"))
        else:
            out.append(_na("energy_balance", "no records past the initial layer"))
    else:
        out.append(_na("energy_balance", "fewer than three regular records"))

    have_j = jparams is not None and np.all(np.isfinite(col["j_val"]))
    inviscid = nu == 0
    if have_j and inviscid and len(reg) >= 2 and all(r.j_val > 0 for r in reg):
        q = float(riccati_ratios(reg).min())
        out.append(_verdict("j_riccati", q > 0, q, 0.0, "min (dJ/dt)/J^2"))
    else:
        out.append(_na("j_riccati", "needs nu = 0 and positive J"))

    if have_j:
        gap = col["j_val"] - jparams.bound_factor * col["max_grad"]
        worst = float(gap.max())
        out.append(_verdict("j_bounding_chain", worst <= 1e-12, worst, 0.0,
                            "max of J - bound_factor * max_grad"))
    else:
        out.append(_na("j_bounding_chain", "no J series"))

    if have_j and extras:
        ratios = [r.j_val**2 / e.cs_rhs for r, e in zip(records, extras) if e.cs_rhs > 0]
        if ratios:
            worst = max(ratios)
            out.append(_verdict("cauchy_schwarz_chain", worst <= 1.0 + 1e-12, worst, 1.0,
                                "max of J^2 / Cauchy-Schwarz bound"))
        else:
            out.append(_na("cauchy_schwarz_chain", "zero profile"))
    else:
        out.append(_na("cauchy_schwarz_chain", "no J series"))

    if have_j and inviscid and len(reg) >= 3:
        j = np.array([r.j_val for r in reg])
        d = np.array([r.dj_rhs for r in reg])
        fd = np.gradient(j, reg[1].t - reg[0].t, edge_order=2)
        scale = np.maximum(np.abs(d), 1e-300)
        worst = float(np.max(np.abs(fd - d) / scale))
        out.append(_verdict("dj_consistency", worst <= tol.dj_consistency, worst,
                            tol.dj_consistency, "max |dJ/dt - dj_rhs| / |dj_rhs|"))
    else:
        out.append(_na("dj_consistency", "needs nu = 0 and three regular records"))

    if have_j and inviscid and extras and c_delta is not None:
        margins = [r.dj_rhs / (c_delta * e.weighted_sq)
                   for r, e in zip(records, extras) if e.weighted_sq > 0]
        if margins:
            worst = min(margins)
            out.append(_verdict("lemma_positivity", worst >= 1.0, worst, 1.0,
                                "min of dj_rhs / (C_delta * weighted square)"))
        else:
            out.append(_na("lemma_positivity", "zero profile"))
    else:
        out.append(_na("lemma_positivity", "needs nu = 0, J series and C_delta"))

    supercritical = nu > 0 and alpha > 1
    if supercritical:
        half = t <= 0.5 * t[-1]
        early = col["hhalf"][half].max()
        late = col["hhalf"][~half].max() if np.any(~half) else early
        ratio = late / early if early > 0 else 0.0
        out.append(_verdict("hhalf_bounded", ratio <= 1.0 + tol.relative, ratio,
                            1.0 + tol.relative, "late max / early max of hhalf"))
        env = col["h1"] / (1.0 + t)
        c_fit = env[half].max()
        worst = float(env.max() / c_fit) if c_fit > 0 else 0.0
        out.append(_verdict("h1_linear_growth", worst <= 1.0 + tol.relative, worst,
                            1.0 + tol.relative, "max h1/(C(1+t)), C fitted on the first half"))
        ok = bool(np.all(np.isfinite(col["h2"])))
        out.append(_verdict("h2_finite", ok, float(np.max(col["h2"])) if ok else math.inf,
                            math.inf, "max h2"))
    else:
        for n in ("hhalf_bounded", "h1_linear_growth", "h2_finite"):
            out.append(_na(n, "needs nu > 0 and alpha > 1"))

    if nu > 0 and alpha == 1 and r0.linf < nu and len(records) >= 2:
        rise = float(np.max(np.diff(col["hhalf"]))) / max(col["hhalf"][0], 1e-300)
        out.append(_verdict("hhalf_nonincreasing", rise <= tol.relative, rise, tol.relative,
                            "largest hhalf increase, relative to initial"))
    else:
        out.append(_na("hhalf_nonincreasing", "needs alpha = 1 and max theta_0 < nu"))

    if nu > 0 and alpha >= 1:
        out.append(_verdict("run_completed", status == "completed", float(t[-1]), math.nan,
                            f"status {status}"))
    else:
        out.append(_na("run_completed", "no global-existence regime"))
    return out

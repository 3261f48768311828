"""Per-snapshot diagnostics and the monitors built on top of them.

A :class:`DiagRecord` collects every norm and functional the a-priori
estimates talk about.  The monitors below check monotonicity, the energy
budget, the blow-up functional ``J`` and its Riccati growth, and fit a
singularity time from the tail of a record series.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, astuple, dataclass, fields, replace
from typing import NamedTuple, Sequence

import numpy as np

from .quadrature import weighted_integral
from .spectral import RealField, hilbert, refined_max_abs

__all__ = [
    "DiagRecord",
    "JParams",
    "NormalizationWarning",
    "RecordBuilder",
    "compute_norms",
    "j_functional",
    "dj_rhs",
    "cauchy_schwarz_rhs",
    "positivity_integral",
    "monotonicity_report",
    "energy_balance_residual",
    "blow_up_fit",
    "BlowUpFit",
    "Violation",
    "regular_records",
    "riccati_ratios",
]


class NormalizationWarning(UserWarning):
    """Raised when ``J`` is evaluated on a profile whose maximum is far from 1."""


@dataclass(frozen=True)
class DiagRecord:
    t: float
    l1: float
    l2: float
    linf: float
    min_val: float
    max_grad: float
    hhalf: float
    h1: float
    h2: float
    diss: float
    cum_diss: float
    pos_int: float
    j_val: float
    dj_rhs: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> tuple:
        return astuple(self)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class JParams:
    delta: float = 0.5
    L: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def bound_factor(self) -> float:
        """``L**(1-delta) / (1-delta)``, the constant of the gradient bound on J."""
        return self.L ** (1.0 - self.delta) / (1.0 - self.delta)


# ---------------------------------------------------------------------------
# norms

def positivity_integral(theta: RealField) -> float:
    """``int theta^2 Lambda theta dx`` evaluated spectrally."""
    g = theta.grid
    lam = g.irfft(g.rfft(theta.values) * np.abs(g.rk))
    return float(np.sum(theta.values**2 * lam) * g.dx)


def compute_norms(theta: RealField, alpha: float, t: float = 0.0) -> DiagRecord:
    """Norm fields of a :class:`DiagRecord`; ``cum_diss`` is 0, J fields NaN.

    ``max_grad`` is the maximum of the interpolated ``|theta_x|``, not just
    its largest sample, so that it converges spectrally under refinement.
    """
    g = theta.grid
    v = theta.values
    c = g.rfft(v)
    return DiagRecord(
        t=float(t),
        l1=float(np.sum(np.abs(v)) * g.dx),
        l2=float(np.sqrt(np.sum(v**2) * g.dx)),
        linf=float(v.max()),
        min_val=float(v.min()),
        max_grad=refined_max_abs(g, c * g.deriv_symbol),
        hhalf=math.sqrt(g.sobolev_sq(c, 0.5)),
        h1=math.sqrt(g.sobolev_sq(c, 1.0)),
        h2=math.sqrt(g.sobolev_sq(c, 2.0)),
        diss=g.sobolev_sq(c, alpha / 2.0),
        cum_diss=0.0,
        pos_int=positivity_integral(theta),
        j_val=math.nan,
        dj_rhs=math.nan,
    )


# ---------------------------------------------------------------------------
# blow-up functional

def _half_line(theta: RealField, values=None):
    """Samples on the nodes x = 0, dx, ..., P (the last one by periodicity)."""
    g = theta.grid
    v = theta.values if values is None else values
    i0 = g.zero_index
    return np.concatenate([v[i0:], v[:1]])


def _check_symmetric(theta: RealField):
    g = theta.grid
    if abs(g.x[g.zero_index]) > 1e-12 * g.half_length:
        raise ValueError("grid has no node at x = 0")


def _running_max(theta: RealField, warn: bool) -> float:
    m = float(theta.values.max())
    if warn and abs(m - 1.0) > 0.05:
        warnings.warn(
            f"J evaluated on an unnormalized profile (max = {m:.4g})",
            NormalizationWarning,
            stacklevel=3,
        )
    return m


def j_functional(theta: RealField, p: JParams, warn: bool = True) -> float:
    """``J = int_0^L (m - theta) / x^(1+delta) dx`` with ``m = max theta``.

    The integrand is taken to vanish at the node ``x = 0``.
    """
    _check_symmetric(theta)
    m = _running_max(theta, warn)
    g = m - _half_line(theta)
    g[0] = 0.0
    return weighted_integral(g, theta.grid.dx, 1.0 + p.delta, p.L, vanish_order=1)


def dj_rhs(theta: RealField, p: JParams, warn: bool = True) -> float:
    """Right side of the J evolution: ``-int_0^P theta_x H(theta) / x^(1+delta) dx``."""
    _check_symmetric(theta)
    _running_max(theta, warn)
    g = theta.grid
    c = g.rfft(theta.values)
    tx = g.irfft(c * g.deriv_symbol)
    ht = g.irfft(c * g.hilbert_symbol)
    prod = _half_line(theta, tx * ht)
    prod[0] = 0.0
    return -weighted_integral(prod, g.dx, 1.0 + p.delta, g.half_length, vanish_order=1)


def cauchy_schwarz_rhs(theta: RealField, p: JParams) -> float:
    """``(L^(1-delta)/(1-delta)) * int_0^P (m - theta)^2 / x^(2+delta) dx``.

    Upper bound for ``J**2``.
    """
    _check_symmetric(theta)
    m = float(theta.values.max())
    f = m - _half_line(theta)
    f[0] = 0.0
    w = weighted_integral(f * f, theta.grid.dx, 2.0 + p.delta, theta.grid.half_length,
                          vanish_order=2)
    return p.bound_factor * w


class RecordBuilder:
    """Builds the record series of a run; owns the running dissipation integral."""

    def __init__(self, alpha: float, nu: float, jparams: JParams | None = None):
        self.alpha = alpha
        self.nu = nu
        self.jparams = jparams
        self._last: DiagRecord | None = None

    def __call__(self, t: float, theta: RealField) -> DiagRecord:
        rec = compute_norms(theta, self.alpha, t)
        cum = 0.0
        if self._last is not None:
            cum = self._last.cum_diss + 0.5 * (t - self._last.t) * (self._last.diss + rec.diss)
        j = djr = math.nan
        if self.jparams is not None and np.any(theta.values != 0):
            j = j_functional(theta, self.jparams, warn=False)
            djr = dj_rhs(theta, self.jparams, warn=False)
        elif self.jparams is not None:
            j = djr = 0.0
        rec = replace(rec, cum_diss=cum, j_val=j, dj_rhs=djr)
        self._last = rec
        return rec


# ---------------------------------------------------------------------------
# monitors

class Violation(NamedTuple):
    kind: str
    index: int
    t: float
    value: float
    limit: float


def monotonicity_report(records: Sequence[DiagRecord], nu: float,
                        abs_tol: float = 1e-8, rel_tol: float = 1e-6) -> list[Violation]:
    """Flag breaches of the maximum principle, L1/L2 decay and the dissipation budget.

    ``abs_tol`` applies to the pointwise bounds, ``rel_tol`` (relative to the
    initial value) to the norm monotonicity and the budget.
    """
    out: list[Violation] = []
    if not records:
        return out
    r0 = records[0]
    budget = r0.l2**2 / (2.0 * nu) if nu > 0 else math.inf
    for i, r in enumerate(records):
        if r.min_val < -abs_tol:
            out.append(Violation("min_below_zero", i, r.t, r.min_val, -abs_tol))
        if r.linf > r0.linf + abs_tol:
            out.append(Violation("max_exceeds_initial", i, r.t, r.linf, r0.linf + abs_tol))
        if i > 0:
            prev = records[i - 1]
            if r.l1 > prev.l1 + rel_tol * max(r0.l1, 1e-300):
                out.append(Violation("l1_increase", i, r.t, r.l1 - prev.l1, rel_tol * r0.l1))
            if r.l2 > prev.l2 + rel_tol * max(r0.l2, 1e-300):
                out.append(Violation("l2_increase", i, r.t, r.l2 - prev.l2, rel_tol * r0.l2))
        if r.cum_diss > budget * (1.0 + rel_tol):
            out.append(Violation("dissipation_budget", i, r.t, r.cum_diss, budget))
    return out


def regular_records(records: Sequence[DiagRecord], interval: float) -> list[DiagRecord]:
    """Keep the records sitting on the uniform grid ``t = k * interval``."""
    out = []
    for r in records:
        k = round(r.t / interval)
        if abs(r.t - k * interval) <= 1e-9 * max(1.0, abs(r.t)):
            out.append(r)
    return out


def energy_balance_residual(records: Sequence[DiagRecord], nu: float,
                            method: str = "centered") -> np.ndarray:
    """Defect of ``d(l2^2/2)/dt = -(pos_int/2 + nu*diss)`` on equispaced records.

    ``method="centered"`` differentiates ``l2^2/2`` with second-order
    differences (one-sided at the ends) and returns one residual per record.
    ``method="simpson"`` compares ``E(t+h) - E(t-h)`` with Simpson's rule for
    the sink over ``[t-h, t+h]``; it is fourth order and returns residuals at
    the interior records only.
    """
    if len(records) < 3:
        raise ValueError("energy balance needs at least three records")
    t = np.array([r.t for r in records])
    dt = np.diff(t)
    if np.ptp(dt) > 1e-9 * dt.mean():
        raise ValueError("records are not equispaced")
    h = dt.mean()
    e = 0.5 * np.array([r.l2**2 for r in records])
    sink = np.array([0.5 * r.pos_int + nu * r.diss for r in records])
    if method == "centered":
        return np.abs(np.gradient(e, h, edge_order=2) + sink)
    if method == "simpson":
        return np.abs((e[2:] - e[:-2]) / (2.0 * h) + (sink[:-2] + 4.0 * sink[1:-1] + sink[2:]) / 6.0)
    raise ValueError(f"unknown method {method!r}")


def riccati_ratios(records: Sequence[DiagRecord]) -> np.ndarray:
    """Discrete ``(Delta J / Delta t) / J^2`` using the left J of each interval."""
    t = np.array([r.t for r in records])
    j = np.array([r.j_val for r in records])
    return np.diff(j) / np.diff(t) / j[:-1] ** 2


class BlowUpFit(NamedTuple):
    T_star: float
    slope: float
    r2: float
    T_star_j: float
    slope_j: float
    r2_j: float


def _line_fit(t, y):
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = slope * t + icpt
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    T = -icpt / slope if slope != 0 else math.inf
    return float(T), float(slope), r2


def blow_up_fit(records: Sequence[DiagRecord], m: int = 10) -> BlowUpFit:
    """Fit straight lines to ``1/max_grad`` and ``1/J`` over the last ``m`` records.

    The zero of each line estimates the singular time.
    """
    if m < 3:
        raise ValueError("window must hold at least three records")
    if len(records) < m:
        raise ValueError(f"need {m} records, have {len(records)}")
    win = records[-m:]
    t = np.array([r.t for r in win])
    g = np.array([r.max_grad for r in win])
    if np.any(np.diff(g) <= 0):
        raise ValueError("max_grad is not strictly increasing over the window")
    T, s, r2 = _line_fit(t, 1.0 / g)
    j = np.array([r.j_val for r in win])
    if np.all(np.isfinite(j)) and np.all(j > 0):
        Tj, sj, r2j = _line_fit(t, 1.0 / j)
    else:
        Tj = sj = r2j = math.nan
    return BlowUpFit(T, s, r2, Tj, sj, r2j)

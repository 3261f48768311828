"""Scenario orchestration and on-disk artifacts.

One run directory holds::

    run.json              config echo, outcome, monitor verdicts, violations
    series.csv            one DiagRecord per row, 17 significant digits
    snapshots/index.csv   index, t, max_grad of each stored profile
    snapshots/t_<i>.csv   x, theta, theta_x
    plots/theta.svg       profiles at the snapshot times
    plots/theta_x.svg     their derivatives

A sweep writes one such directory per grid point (without snapshots) plus
``regime_map.csv``; the lemma check writes ``lemma.csv`` and ``run.json``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import BLOW_UP_SCENARIOS, ScenarioSpec, with_solver
from .diagnostics import (
    DiagRecord,
    blow_up_fit,
    monotonicity_report,
    regular_records,
)
from .mellin import best_constant, lambda_grid, standard_corpus, verify_inequality, LemmaReport
from .monitors import FAIL, PASS, NOT_APPLICABLE, evaluate_monitors, record_extras
from .solver import BLOW_UP, COMPLETED, NONFINITE, STEP_FLOOR, run
from .spectral import Grid, RealField
from .svgplot import Series, line_plot

log = logging.getLogger(__name__)

__all__ = [
    "EXIT_OK",
    "EXIT_MONITOR",
    "EXIT_ABORT",
    "EXIT_CONFIG",
    "ScenarioResult",
    "RegimeMapEntry",
    "run_scenario",
    "run_sweep",
    "run_lemma_verify",
    "plot_run",
    "write_series_csv",
    "read_series_csv",
    "growth_snapshot_indices",
    "classify_regime",
    "SNAPSHOT_COUNT",
]

EXIT_OK, EXIT_MONITOR, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2, 3
SNAPSHOT_COUNT = 9
_ABORTS = (STEP_FLOOR, NONFINITE)


@dataclass
class ScenarioResult:
    exit_code: int
    run_dir: Path
    summary: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# serialization

def _g17(v) -> str:
    return "%.17g" % v


def write_series_csv(records: Sequence[DiagRecord], path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        fh.write(",".join(DiagRecord.columns()) + "\n")
        for r in records:
            fh.write(",".join(_g17(v) for v in r.as_row()) + "\n")
    return p


def read_series_csv(path) -> list[DiagRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DiagRecord.columns():
        raise ValueError(f"{path}: unexpected header")
    return [DiagRecord(*map(float, row)) for row in rows[1:]]


def _write_snapshot(path: Path, grid: Grid, values: np.ndarray):
    c = grid.rfft(values)
    tx = grid.irfft(c * grid.deriv_symbol)
    with path.open("w", newline="") as fh:
        fh.write("x,theta,theta_x\n")
        for row in zip(grid.x, values, tx):
            fh.write(",".join(_g17(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")


# ---------------------------------------------------------------------------
# snapshots

def growth_snapshot_indices(max_grads: Sequence[float], count: int = SNAPSHOT_COUNT) -> list[int]:
    """Indices of the first states reaching ``count`` log-equispaced gradient levels.

    Levels run from the first to the last entry of ``max_grads``; the last
    index is always the final state.
    """
    g = np.asarray(max_grads, dtype=float)
    if g.size == 0:
        return []
    lo, hi = g[0], g[-1]
    if not (hi > lo > 0):
        return list(np.unique(np.linspace(0, g.size - 1, count).round().astype(int)))
    levels = lo * (hi / lo) ** (np.arange(count) / (count - 1))
    running = np.maximum.accumulate(g)
    out = [int(np.searchsorted(running, lv, side="left")) for lv in levels]
    out[-1] = g.size - 1
    return [min(i, g.size - 1) for i in out]


def _has_even_peak(theta: RealField) -> bool:
    v = theta.values
    i0 = theta.grid.zero_index
    scale = max(float(np.max(np.abs(v))), 1e-300)
    left = v[1:i0][::-1]
    right = v[i0 + 1:]
    return bool(np.max(np.abs(left - right)) <= 1e-12 * scale and v[i0] >= v.max() - 1e-12 * scale)


# ---------------------------------------------------------------------------
# one solver run

def _exit_code(status: str, monitors, exploratory: bool) -> int:
    if status in _ABORTS:
        return EXIT_ABORT
    if not exploratory and any(m.status == FAIL for m in monitors):
        return EXIT_MONITOR
    return EXIT_OK


def _solve(spec: ScenarioSpec, write_snapshots: bool = True,
           step_hook: Optional[Callable] = None) -> ScenarioResult:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = spec.grid
    theta0 = spec.theta0()
    cfg = spec.solver
    jparams = spec.jparams if _has_even_peak(theta0) else None
    c_delta = best_constant(jparams.delta) if (jparams is not None and cfg.nu == 0) else None

    extras = []

    def observer(rec, state):
        if jparams is not None:
            extras.append(record_extras(rec.t, state.theta, jparams))

    growth_policy = not spec.snapshot_times and spec.name in BLOW_UP_SCENARIOS
    if spec.snapshot_times:
        wanted = tuple(spec.snapshot_times)
    elif growth_policy:
        wanted = ()
    else:
        wanted = tuple(np.linspace(0.0, cfg.t_end, SNAPSHOT_COUNT))
    history: list[tuple[float, np.ndarray, float]] = []
    captured: dict[float, tuple[np.ndarray, float]] = {}
    want = set(wanted)

    def on_step(state, mg):
        if step_hook is not None:
            step_hook(state, mg)
        if not write_snapshots:
            return
        if growth_policy:
            history.append((state.t, state.theta.values, mg))
        elif state.t in want:
            captured[state.t] = (state.theta.values, mg)

    outcome = run(cfg, theta0, observer=observer, jparams=jparams, on_step=on_step,
                  checkpoints=wanted)
    records = outcome.records

    monitors = evaluate_monitors(records, nu=cfg.nu, alpha=cfg.alpha,
                                 record_interval=cfg.record_interval, status=outcome.status,
                                 jparams=jparams, extras=extras, c_delta=c_delta)
    violations = [v._asdict() for v in monotonicity_report(records, cfg.nu)]
    violations += [{"kind": m.name, "value": m.value, "limit": m.limit}
                   for m in monitors if m.status == FAIL]

    fit = None
    if cfg.nu == 0 and outcome.status == BLOW_UP:
        try:
            fit = blow_up_fit(regular_records(records, cfg.record_interval), 10)._asdict()
        except ValueError as exc:
            fit = {"error": str(exc)}

    write_series_csv(records, out / "series.csv")

    snaps = []
    if write_snapshots:
        sdir = out / "snapshots"
        sdir.mkdir(exist_ok=True)
        if growth_policy:
            chosen = [history[i] for i in growth_snapshot_indices([h[2] for h in history])]
        else:
            chosen = [(t, *captured[t]) for t in wanted if t in captured]
        for i, (t, values, mg) in enumerate(chosen):
            _write_snapshot(sdir / f"t_{i}.csv", grid, values)
            snaps.append({"index": i, "t": t, "max_grad": mg, "file": f"snapshots/t_{i}.csv"})
        with (sdir / "index.csv").open("w", newline="") as fh:
            fh.write("index,t,max_grad\n")
            for s in snaps:
                fh.write(f"{s['index']},{_g17(s['t'])},{_g17(s['max_grad'])}\n")
        missed = [t for t in wanted if t not in captured]
    else:
        missed = []

    code = _exit_code(outcome.status, monitors, spec.exploratory)
    summary = {
        "scenario": spec.name,
        "exploratory": spec.exploratory,
        "config": spec.to_dict(),
        "outcome": {
            "status": outcome.status,
            "final_time": outcome.final_time,
            "reason": outcome.reason,
            "steps": outcome.final_state.step_count,
            "records": len(records),
        },
        "monitors": {m.name: m.as_dict() for m in monitors},
        "violations": violations,
        "blow_up_fit": fit,
        "c_delta": c_delta,
        "snapshots": snaps,
        "missed_snapshot_times": missed,
        "exit_code": code,
    }
    _write_json(out / "run.json", summary)
    if snaps:
        plot_run(out)
    return ScenarioResult(code, out, summary)


# ---------------------------------------------------------------------------
# plots

def plot_run(run_dir, window: Optional[float] = None) -> list[Path]:
    """Render ``plots/theta.svg`` and ``plots/theta_x.svg`` from stored snapshots."""
    rd = Path(run_dir)
    index = rd / "snapshots" / "index.csv"
    if not index.exists():
        raise FileNotFoundError(f"{index} not found")
    with index.open(newline="") as fh:
        entries = list(csv.DictReader(fh))
    if window is None:
        window = _plot_window(rd)
    th, tx = [], []
    for e in entries:
        data = np.loadtxt(rd / "snapshots" / f"t_{e['index']}.csv", delimiter=",", skiprows=1,
                          ndmin=2)
        keep = np.abs(data[:, 0]) <= window
        label = f"t = {float(e['t']):.4g}"
        th.append(Series(label, data[keep, 0], data[keep, 1]))
        tx.append(Series(label, data[keep, 0], data[keep, 2]))
    return [
        line_plot(th, rd / "plots" / "theta.svg", title="theta", ylabel="theta"),
        line_plot(tx, rd / "plots" / "theta_x.svg", title="theta_x", ylabel="theta_x"),
    ]


def _plot_window(rd: Path) -> float:
    try:
        cfg = json.loads((rd / "run.json").read_text())["config"]
        ini = cfg["initial"]
        P = cfg["grid"]["P"]
        if ini["kind"] in ("quartic_bump", "smooth_bump", "scaled"):
            return min(P, 2.0 * ini["width"] + abs(ini["shift"]))
        return P
    except (OSError, KeyError, ValueError, TypeError):
        return math.inf


# ---------------------------------------------------------------------------
# sweep

def classify_regime(nu: float, alpha: float, linf0: float) -> str:
    """Which result, if any, speaks about the grid point."""
    if nu == 0:
        return "inviscid_blowup"
    if alpha > 1:
        return "global_existence"
    if alpha == 1 and linf0 < nu:
        return "small_data"
    return "exploratory"


@dataclass(frozen=True)
class RegimeMapEntry:
    nu: float
    alpha: float
    regime: str
    exploratory: bool
    status: str
    final_time: float
    trigger_time: float
    max_grad_final: float
    hhalf_final: float
    hhalf_nonincreasing: str
    monitors: str
    exit_code: int
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.__dataclass_fields__)


def _point_dir(root: Path, nu: float, alpha: float) -> Path:
    return root / "points" / f"nu_{nu:g}_alpha_{alpha:g}"


def _sweep_point(spec: ScenarioSpec, nu: float, alpha: float) -> RegimeMapEntry:
    linf0 = float(spec.theta0().values.max())
    regime = classify_regime(nu, alpha, linf0)
    exploratory = regime == "exploratory"
    try:
        point = replace(with_solver(spec, nu=nu, alpha=alpha),
                        output_dir=_point_dir(Path(spec.output_dir), nu, alpha),
                        snapshot_times=())
        res = _solve(point, write_snapshots=False)
    except Exception as exc:  # recorded in the row; the sweep continues
        return RegimeMapEntry(nu, alpha, regime, exploratory, "error", math.nan, math.nan,
                              math.nan, math.nan, "", "", EXIT_ABORT, f"{type(exc).__name__}: {exc}")
    s = res.summary
    last = read_series_csv(res.run_dir / "series.csv")[-1]
    mons = s["monitors"]
    verdicts = [m["status"] for m in mons.values() if m["status"] != NOT_APPLICABLE]
    hh = mons["hhalf_nonincreasing"]["status"]
    status = s["outcome"]["status"]
    code = res.exit_code if not exploratory else (EXIT_ABORT if res.exit_code == EXIT_ABORT else EXIT_OK)
    return RegimeMapEntry(
        nu=nu, alpha=alpha, regime=regime, exploratory=exploratory, status=status,
        final_time=s["outcome"]["final_time"],
        trigger_time=s["outcome"]["final_time"] if status == BLOW_UP else math.nan,
        max_grad_final=last.max_grad, hhalf_final=last.hhalf,
        hhalf_nonincreasing="" if hh == NOT_APPLICABLE else hh,
        monitors=FAIL if FAIL in verdicts else PASS, exit_code=code)


def run_sweep(spec: ScenarioSpec, workers: Optional[int] = None) -> ScenarioResult:
    """Run every (nu, alpha) point of ``spec.sweep``; rows follow the grid order."""
    if spec.sweep is None:
        raise ValueError("spec has no sweep section")
    pts = spec.sweep.points()
    if workers is None:
        workers = spec.sweep.workers or min(os.cpu_count() or 1, len(pts))
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if workers <= 1:
        rows = [_sweep_point(spec, nu, a) for nu, a in pts]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_sweep_point, spec, nu, a) for nu, a in pts]
            rows = [f.result() for f in futs]
    path = out / "regime_map.csv"
    with path.open("w", newline="") as fh:
        fh.write(",".join(RegimeMapEntry.columns()) + "\n")
        for r in rows:
            vals = []
            for v in asdict(r).values():
                if isinstance(v, bool):
                    vals.append("true" if v else "false")
                elif isinstance(v, float):
                    vals.append(_g17(v))
                else:
                    vals.append(str(v).replace(",", ";"))
            fh.write(",".join(vals) + "\n")
    codes = [r.exit_code for r in rows]
    code = EXIT_ABORT if EXIT_ABORT in codes else (EXIT_MONITOR if EXIT_MONITOR in codes else EXIT_OK)
    summary = {"scenario": spec.name, "config": spec.to_dict(),
               "points": [asdict(r) for r in rows], "exit_code": code}
    _write_json(out / "run.json", summary)
    return ScenarioResult(code, out, summary)


# ---------------------------------------------------------------------------
# lemma check

def run_lemma_verify(spec: ScenarioSpec) -> ScenarioResult:
    """Check the weighted inequality on the standard corpus; writes ``lemma.csv``."""
    lp = spec.lemma
    if lp is None:
        raise ValueError("spec has no lemma section")
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lam = lambda_grid(lp.lambda_max, lp.dlam)
    c = best_constant(lp.delta, lp.lambda_max)
    reports: list[LemmaReport] = []
    errors = []
    for f in standard_corpus(lp.count, lp.seed):
        try:
            reports.append(verify_inequality(f, lp.delta, lam, c, lp.rel_tol))
        except Exception as exc:  # one bad function must not hide the others
            errors.append({"name": f.name, "error": f"{type(exc).__name__}: {exc}"})
    with (out / "lemma.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LemmaReport.columns())
        for r in reports:
            w.writerow([v if isinstance(v, str) else str(v).lower() if isinstance(v, bool)
                        else _g17(v) for v in r.as_row()])
    ok = not errors and all(r.passed for r in reports)
    code = EXIT_OK if ok else EXIT_MONITOR
    summary = {"scenario": spec.name, "config": spec.to_dict(), "c_delta": c,
               "rows": [dict(zip(LemmaReport.columns(), r.as_row())) for r in reports],
               "errors": errors, "all_pass": ok, "exit_code": code}
    _write_json(out / "run.json", summary)
    return ScenarioResult(code, out, summary)


def run_scenario(spec: ScenarioSpec, step_hook: Optional[Callable] = None) -> ScenarioResult:
    """Dispatch on the scenario name.

    ``step_hook(state, max_grad)`` sees every accepted solver state of a
    single-run scenario; it is ignored by the sweep and the lemma check.
    """
    if spec.name == "lemma_verify":
        return run_lemma_verify(spec)
    if spec.name == "regime_sweep":
        return run_sweep(spec)
    return _solve(spec, step_hook=step_hook)

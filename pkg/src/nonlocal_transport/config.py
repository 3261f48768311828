"""Scenario files: INI-style ``key = value`` text with section headers.

A minimal file only names the scenario::

    [scenario]
    name = inviscid_blowup

Everything else falls back to the per-scenario defaults below.  Numeric
values may use ``pi`` and ``inf`` with ``+ - * / **`` (``8*pi``); lists are
comma separated.  Unknown sections or keys are rejected, and every error
names the offending field and, when it came from the file, its line.
"""
from __future__ import annotations

import ast
import configparser
import math
import operator
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .diagnostics import JParams
from .solver import SolverConfig
from .spectral import Grid, RealField

__all__ = [
    "ConfigError",
    "InitialData",
    "SweepSpec",
    "LemmaSpec",
    "ScenarioSpec",
    "SCENARIOS",
    "EXPLORATORY",
    "OUTPUT_ROOT_ENV",
    "load_config",
    "parse_config",
    "parse_number",
    "with_solver",
]

OUTPUT_ROOT_ENV = "NLT_OUTPUT_ROOT"

SCENARIOS = (
    "inviscid_blowup",
    "viscous_supercritical",
    "critical_small",
    "critical_large",
    "subcritical_exploratory",
    "lemma_verify",
    "regime_sweep",
)
EXPLORATORY = frozenset({"critical_large", "subcritical_exploratory"})
BLOW_UP_SCENARIOS = frozenset({"inviscid_blowup"})
MAX_PRINCIPLE_SCENARIOS = frozenset(SCENARIOS) - {"lemma_verify"}

INITIAL_KINDS = ("quartic_bump", "smooth_bump", "scaled", "shifted_trig", "custom_samples")

_SCENARIO_SOLVER = {
    "inviscid_blowup": dict(nu=0.0, alpha=1.0, t_end=2.0, record_interval=0.005),
    "viscous_supercritical": dict(nu=0.5, alpha=1.5, t_end=10.0, record_interval=0.01),
    "critical_small": dict(nu=2.0, alpha=1.0, t_end=10.0, record_interval=0.01),
    "critical_large": dict(nu=0.5, alpha=1.0, t_end=10.0, record_interval=0.01),
    "subcritical_exploratory": dict(nu=0.5, alpha=0.5, t_end=10.0, record_interval=0.01),
    "lemma_verify": {},
    "regime_sweep": dict(t_end=5.0, record_interval=0.01),
}


class ConfigError(ValueError):
    """Bad configuration; ``field`` is ``section.key`` and ``line`` a 1-based line or None."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None,
                 source: Optional[str] = None):
        self.field = field
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        label = f"{field}: " if field else ""
        super().__init__(f"{prefix + ': ' if prefix else ''}{label}{message}")


# ---------------------------------------------------------------------------
# value parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "inf": math.inf}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """Arithmetic on numbers, ``pi`` and ``inf``; ``8pi`` is read as ``8*pi``."""
    s = re.sub(r"(\d)\s*(pi)\b", r"\1*\2", text.strip().lower())
    try:
        val = _eval_node(ast.parse(s, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    return float(val)


def _parse_int(text: str) -> int:
    v = parse_number(text)
    if not v.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text: str) -> tuple:
    items = [t for t in (p.strip() for p in text.split(",")) if t]
    return tuple(parse_number(t) for t in items)


def _parse_str(text: str) -> str:
    return text.strip()


# section -> key -> parser
_SCHEMA = {
    "scenario": {"name": _parse_str, "output_dir": _parse_str, "snapshot_times": _parse_list},
    "grid": {"n": _parse_int, "p": parse_number},
    "solver": {
        "nu": parse_number, "alpha": parse_number, "cfl": parse_number,
        "dt_max": parse_number, "dt_min": parse_number, "t_end": parse_number,
        "grad_threshold": parse_number, "record_interval": parse_number,
        "dealias_on": _parse_bool, "seed": _parse_int, "tail_tol": parse_number,
        "tail_growth": parse_number,
    },
    "initial": {
        "kind": _parse_str, "amplitude": parse_number, "width": parse_number,
        "shift": parse_number, "mode": _parse_int, "base": _parse_str,
        "samples_file": _parse_str,
    },
    "j": {"delta": parse_number, "l": parse_number},
    "sweep": {"nu": _parse_list, "alpha": _parse_list, "workers": _parse_int},
    "lemma": {
        "delta": parse_number, "count": _parse_int, "seed": _parse_int,
        "lambda_max": parse_number, "dlam": parse_number, "rel_tol": parse_number,
    },
}


# ---------------------------------------------------------------------------
# spec types

@dataclass(frozen=True)
class InitialData:
    """Initial profile descriptor; :meth:`sample` evaluates it on a grid."""

    kind: str = "quartic_bump"
    amplitude: float = 1.0
    width: float = 1.0
    shift: float = 0.0
    mode: int = 1
    base: str = "quartic_bump"
    samples_file: Optional[str] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {INITIAL_KINDS}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.kind == "scaled" and self.base not in ("quartic_bump", "smooth_bump", "shifted_trig"):
            raise ValueError(f"scaled needs base in quartic_bump, smooth_bump, shifted_trig;"
                             f" got {self.base!r}")
        if self.kind == "custom_samples" and not self.samples_file:
            raise ValueError("custom_samples needs samples_file")
        if self.mode < 1:
            raise ValueError("mode must be >= 1")

    def _profile(self, kind, x, P, amplitude, width, shift):
        s = (x - shift) / width
        if kind == "quartic_bump":
            return amplitude * np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 2, 0.0)
        if kind == "smooth_bump":
            return amplitude * np.exp(-s * s)
        # shifted_trig: nonnegative single mode, maximum at the shift
        return 0.5 * amplitude * (1.0 + np.cos(self.mode * np.pi * (x - shift) / P))

    def sample(self, grid: Grid) -> RealField:
        x = grid.x
        P = grid.half_length
        if self.kind == "custom_samples":
            vals = _read_samples(Path(self.samples_file), grid.n)
            return RealField(grid, self.amplitude * vals)
        if self.kind == "scaled":
            # the base profile at unit parameters, dilated and rescaled
            return RealField(grid, self._profile(self.base, x, P, self.amplitude,
                                                 self.width, self.shift))
        return RealField(grid, self._profile(self.kind, x, P, self.amplitude,
                                             self.width, self.shift))


def _read_samples(path: Path, n: int) -> np.ndarray:
    """One value per line, or a CSV whose header names a ``theta`` column."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read samples file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    col = -1
    if lines:
        try:
            float(lines[0].split(",")[-1])
        except ValueError:
            header = [h.strip() for h in lines.pop(0).split(",")]
            if "theta" not in header:
                raise ValueError(f"{path}: header has no theta column") from None
            col = header.index("theta")
    try:
        vals = [float(ln.split(",")[col]) for ln in lines]
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed sample line") from exc
    arr = np.array(vals, dtype=float)
    if arr.size != n:
        raise ValueError(f"{path}: expected {n} samples, found {arr.size}")
    return arr


@dataclass(frozen=True)
class SweepSpec:
    nu: tuple = (0.0, 0.5, 1.0, 2.0)
    alpha: tuple = (0.5, 1.0, 1.5, 2.0)
    workers: int = 0  # 0: one per CPU, capped by the number of points

    def __post_init__(self):
        if not self.nu or not self.alpha:
            raise ValueError("sweep grid must be nonempty")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")

    def points(self) -> list[tuple[float, float]]:
        return [(nu, a) for nu in self.nu for a in self.alpha]


@dataclass(frozen=True)
class LemmaSpec:
    delta: float = 0.5
    count: int = 10
    seed: int = 0
    lambda_max: float = 60.0
    dlam: float = 0.01
    rel_tol: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.count < 3:
            raise ValueError("count must be at least 3")
        if not (self.lambda_max > 0 and self.dlam > 0):
            raise ValueError("lambda_max and dlam must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    solver: SolverConfig = field(default_factory=SolverConfig)
    n: int = 4096
    half_length: float = 8.0 * math.pi
    initial: InitialData = field(default_factory=InitialData)
    jparams: JParams = field(default_factory=JParams)
    output_dir: Path = Path(".")
    snapshot_times: tuple = ()
    sweep: Optional[SweepSpec] = None
    lemma: Optional[LemmaSpec] = None

    @property
    def exploratory(self) -> bool:
        return self.name in EXPLORATORY

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.half_length)

    def theta0(self) -> RealField:
        return self.initial.sample(self.grid)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "exploratory": self.exploratory,
            "grid": {"n": self.n, "P": self.half_length},
            "solver": asdict(self.solver),
            "initial": asdict(self.initial),
            "j": {"delta": self.jparams.delta, "L": self.jparams.L},
            "output_dir": str(self.output_dir),
            "snapshot_times": list(self.snapshot_times),
        }
        if self.sweep is not None:
            d["sweep"] = {"nu": list(self.sweep.nu), "alpha": list(self.sweep.alpha),
                          "workers": self.sweep.workers}
        if self.lemma is not None:
            d["lemma"] = asdict(self.lemma)
        return d


# ---------------------------------------------------------------------------
# loading

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:\s#;][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict:
    out, sec = {}, None
    for i, ln in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(ln)
        if m:
            sec = m.group(1).strip().lower()
            out.setdefault((sec, None), i)
            continue
        m = _KEY_RE.match(ln)
        if m and sec is not None:
            out.setdefault((sec, m.group(1).strip().lower()), i)
    return out


def _parse_overrides(overrides: Sequence[str]) -> list[tuple[str, str, str]]:
    out = []
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not section.key=value", source="--set")
        lhs, value = item.split("=", 1)
        sec, key = lhs.strip().lower().split(".", 1)
        out.append((sec, key.strip(), value))
    return out


def parse_config(text: str, source: str = "<string>", overrides: Sequence[str] = (),
                 base_dir: Optional[Path] = None) -> ScenarioSpec:
    """Parse config ``text`` (plus ``section.key=value`` overrides) into a validated spec."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   strict=True)
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno, source=source) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line=lineno, source=source) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError("duplicate entry", line=exc.lineno, source=source) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc), source=source) from exc

    lines = _line_index(text)
    raw: dict[str, dict[str, tuple[str, Optional[int], str]]] = {}
    for sec in cp.sections():
        s = sec.lower()
        if s not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", line=lines.get((s, None)), source=source)
        for key, value in cp.items(sec):
            raw.setdefault(s, {})[key] = (value, lines.get((s, key)), source)
    for sec, key, value in _parse_overrides(overrides):
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", field=f"{sec}.{key}", source="--set")
        raw.setdefault(sec, {})[key] = (value, None, "--set")

    values: dict[str, dict[str, Any]] = {}
    for sec, items in raw.items():
        for key, (value, line, src) in items.items():
            if key not in _SCHEMA[sec]:
                raise ConfigError("unknown key", field=f"{sec}.{key}", line=line, source=src)
            try:
                values.setdefault(sec, {})[key] = _SCHEMA[sec][key](value)
            except ValueError as exc:
                raise ConfigError(str(exc), field=f"{sec}.{key}", line=line, source=src) from exc

    def where(sec, key):
        v = raw.get(sec, {}).get(key)
        return (v[1], v[2]) if v else (None, source)

    def fail(sec, key, msg):
        line, src = where(sec, key)
        return ConfigError(msg, field=f"{sec}.{key}" if key else sec, line=line, source=src)

    scen = values.get("scenario", {})
    name = scen.get("name")
    if name is None:
        raise fail("scenario", "name", "missing; choose one of " + ", ".join(SCENARIOS))
    if name not in SCENARIOS:
        raise fail("scenario", "name", f"unknown scenario {name!r}")

    # solver: scenario defaults, then file values
    skw = dict(_SCENARIO_SOLVER[name])
    skw.update(values.get("solver", {}))
    try:
        solver = SolverConfig(**skw)
    except ValueError as exc:
        key = _field_in_message(str(exc), [f.name for f in fields(SolverConfig)])
        raise fail("solver", key, str(exc)) from exc

    g = values.get("grid", {})
    n = g.get("n", 4096)
    P = g.get("p", 8.0 * math.pi)
    try:
        Grid(n, P)
    except ValueError as exc:
        key = "n" if "n must" in str(exc) else "p"
        raise fail("grid", key, str(exc)) from exc

    ikw = dict(values.get("initial", {}))
    if "samples_file" in ikw and base_dir is not None:
        p = Path(ikw["samples_file"])
        ikw["samples_file"] = str(p if p.is_absolute() else base_dir / p)
    try:
        initial = InitialData(**ikw)
    except ValueError as exc:
        key = _field_in_message(str(exc), [f.name for f in fields(InitialData)])
        raise fail("initial", key, str(exc)) from exc

    j = values.get("j", {})
    try:
        jparams = JParams(delta=j.get("delta", 0.5), L=j.get("l", 1.0))
    except ValueError as exc:
        raise fail("j", "delta" if "delta" in str(exc) else "l", str(exc)) from exc

    snaps = tuple(sorted(scen.get("snapshot_times", ())))
    for ts in snaps:
        if not 0.0 <= ts <= solver.t_end:
            raise fail("scenario", "snapshot_times",
                       f"snapshot time {ts} outside [0, t_end = {solver.t_end}]")

    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    out = Path(scen.get("output_dir", name))
    output_dir = out if out.is_absolute() else root / out

    sweep = lemma = None
    if name == "regime_sweep" or "sweep" in values:
        try:
            sweep = SweepSpec(**values.get("sweep", {}))
        except ValueError as exc:
            raise fail("sweep", None, str(exc)) from exc
        for a in sweep.alpha:
            if not 0.0 <= a <= 2.0:
                raise fail("sweep", "alpha", f"alpha must lie in [0, 2], got {a}")
        for v in sweep.nu:
            if v < 0:
                raise fail("sweep", "nu", f"nu must be >= 0, got {v}")
    if name == "lemma_verify" or "lemma" in values:
        try:
            lemma = LemmaSpec(**values.get("lemma", {}))
        except ValueError as exc:
            key = _field_in_message(str(exc), [f.name for f in fields(LemmaSpec)])
            raise fail("lemma", key, str(exc)) from exc

    spec = ScenarioSpec(name=name, solver=solver, n=n, half_length=P, initial=initial,
                        jparams=jparams, output_dir=output_dir, snapshot_times=snaps,
                        sweep=sweep, lemma=lemma)
    if name != "lemma_verify":
        _check_initial(spec, fail)
    return spec


def _field_in_message(msg: str, names: Sequence[str]) -> Optional[str]:
    for nm in sorted(names, key=len, reverse=True):
        if re.search(rf"\b{re.escape(nm)}\b", msg):
            return nm
    return None


def _check_initial(spec: ScenarioSpec, fail):
    try:
        v = spec.theta0().values
    except ValueError as exc:
        raise fail("initial", "samples_file", str(exc)) from exc
    scale = max(float(np.max(np.abs(v))), 1e-300)
    if spec.name in MAX_PRINCIPLE_SCENARIOS and v.min() < -1e-14 * scale:
        key = "amplitude" if spec.initial.amplitude < 0 else "kind"
        raise fail("initial", key, "initial data must be nonnegative for this scenario")
    if spec.name in BLOW_UP_SCENARIOS:
        i0 = spec.grid.zero_index
        left = v[1:i0][::-1]
        right = v[i0 + 1:]
        if np.max(np.abs(left - right[:left.size])) > 1e-12 * scale:
            raise fail("initial", "shift", "blow-up scenario needs even initial data")
        if v[i0] < v.max() - 1e-12 * scale:
            raise fail("initial", "shift", "blow-up scenario needs the maximum at x = 0")


def load_config(path, overrides: Sequence[str] = ()) -> ScenarioSpec:
    """Read and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(p)) from exc
    return parse_config(text, source=str(p), overrides=overrides, base_dir=p.parent)


def with_solver(spec: ScenarioSpec, **kw) -> ScenarioSpec:
    """Copy of ``spec`` with solver fields replaced."""
    return replace(spec, solver=replace(spec.solver, **kw))

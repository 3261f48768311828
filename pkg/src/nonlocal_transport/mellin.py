"""Numerical check of the weighted Hilbert-transform inequality on the half line.

For ``0 < delta < 1`` and ``f`` even with ``f(0) = 0``,

    I(f) = -int_0^inf f'(x) (Hf)(x) x^(-1-delta) dx
         >= C_delta * int_0^inf f(x)^2 x^(-2-delta) dx.

``I`` is computed two independent ways: directly, with a principal-value
quadrature for ``Hf``; and spectrally, from the Mellin transform
``F(lam) = int_0^inf xi^(i lam - 3/2 - delta/2) f(xi) d xi`` and the
multiplier ``M(lam)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "TestFunction",
    "MellinSpectrum",
    "MellinTruncationError",
    "UnresolvedSpectrumError",
    "PVConvergenceError",
    "gaussian_moment",
    "gaussian_moment_sum",
    "bounded_tail",
    "ramp",
    "x_exp",
    "zero_function",
    "random_corpus",
    "standard_corpus",
    "lambda_grid",
    "mellin_transform",
    "multiplier_M",
    "hilbert_pv",
    "lhs_direct",
    "lhs_mellin",
    "rhs_weighted",
    "plancherel_norm",
    "best_constant",
    "argmin_re_M",
    "verify_inequality",
    "LemmaReport",
]


class MellinTruncationError(RuntimeError):
    pass


class UnresolvedSpectrumError(RuntimeError):
    pass


class PVConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """An admissible profile on the half line, extended evenly to the line.

    ``mellin`` and ``hilbert`` are optional closed forms used only as oracles.
    """

    __test__ = False  # not a pytest class

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Optional[Callable[[np.ndarray], np.ndarray]] = None
    x_max: float = 10.0
    smooth: bool = True
    bounded_tail: bool = False
    mellin: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(default=None, repr=False)
    hilbert: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    @property
    def vanishes_at_zero(self) -> bool:
        return float(self.f(np.array([0.0]))[0]) == 0.0

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.df is not None:
            return self.df(x)
        # sixth-order central differences
        h = 1e-3 * np.maximum(1.0, np.abs(x))
        f = self.f
        return (45 * (f(x + h) - f(x - h)) - 9 * (f(x + 2 * h) - f(x - 2 * h))
                + (f(x + 3 * h) - f(x - 3 * h))) / (60 * h)

    def scaled(self, s: float) -> "TestFunction":
        """The profile ``x -> f(s x)``."""
        f, df = self.f, self.df
        mel = self.mellin
        hil = self.hilbert
        return TestFunction(
            name=f"{self.name}@x{s:g}",
            f=lambda x: f(s * x),
            df=None if df is None else (lambda x: s * df(s * x)),
            x_max=self.x_max / s,
            smooth=self.smooth,
            bounded_tail=self.bounded_tail,
            mellin=None if mel is None else (
                lambda lam, d: s ** (-(1j * lam - 0.5 - d / 2)) * mel(lam, d)),
            hilbert=None if hil is None else (lambda x: hil(s * x)),
        )


# ---------------------------------------------------------------------------
# catalogue of profiles

def _mellin_exponent(lam, delta):
    return 1j * np.asarray(lam) - 1.5 - 0.5 * delta


def gaussian_moment(c: float = 1.0, a: float = 1.0) -> TestFunction:
    """``a x^2 exp(-c x^2)``."""
    def f(x):
        return a * x * x * np.exp(-c * x * x)

    def df(x):
        return a * (2 * x - 2 * c * x**3) * np.exp(-c * x * x)

    def mel(lam, delta):
        s = _mellin_exponent(lam, delta) + 3.0  # int xi^(s-1) e^(-c xi^2)
        return a * 0.5 * c ** (-s / 2) * special.gamma(s / 2)

    def hil(x):
        return a * (2 / math.sqrt(math.pi) * x * x * special.dawsn(math.sqrt(c) * x)
                    - x / math.sqrt(math.pi * c))

    x_max = math.sqrt(40.0 / c)
    return TestFunction(f"x2exp({c:g})*{a:g}", f, df, x_max, mellin=mel, hilbert=hil)


def gaussian_moment_sum(coeffs, rates) -> TestFunction:
    parts = [gaussian_moment(c, a) for a, c in zip(coeffs, rates)]
    name = "+".join(p.name for p in parts)
    return TestFunction(
        name,
        f=lambda x: sum(p.f(x) for p in parts),
        df=lambda x: sum(p.df(x) for p in parts),
        x_max=max(p.x_max for p in parts),
        mellin=lambda lam, d: sum(p.mellin(lam, d) for p in parts),
        hilbert=lambda x: sum(p.hilbert(x) for p in parts),
    )


def bounded_tail() -> TestFunction:
    """``1 - exp(-x^2)``: vanishes at 0 and tends to 1, like ``1 - theta``."""
    def mel(lam, delta):
        s = _mellin_exponent(lam, delta) + 1.0
        return -0.5 * special.gamma(s / 2)

    return TestFunction(
        "one_minus_gauss",
        f=lambda x: -np.expm1(-x * x),
        df=lambda x: 2 * x * np.exp(-x * x),
        x_max=7.0,
        bounded_tail=True,
        mellin=mel,
        hilbert=lambda x: -2 / math.sqrt(math.pi) * special.dawsn(x),
    )


def ramp() -> TestFunction:
    """``x`` on (0, 1), 0 beyond; the jump takes its midpoint value."""
    def f(x):
        return np.where(x < 1.0, x, np.where(x == 1.0, 0.5, 0.0))

    def mel(lam, delta):
        return 1.0 / (_mellin_exponent(lam, delta) + 2.0)

    return TestFunction("ramp", f, lambda x: np.where(x < 1.0, 1.0, 0.0), 1.0,
                        smooth=False, mellin=mel)


def x_exp() -> TestFunction:
    """``x exp(-x)``; its Mellin transform is a Gamma function."""
    def mel(lam, delta):
        return special.gamma(_mellin_exponent(lam, delta) + 2.0)

    return TestFunction("xexp", lambda x: x * np.exp(-x), lambda x: (1 - x) * np.exp(-x),
                        40.0, smooth=False, mellin=mel)


def zero_function() -> TestFunction:
    return TestFunction("zero", lambda x: np.zeros_like(x), lambda x: np.zeros_like(x), 1.0,
                        mellin=lambda lam, d: np.zeros(np.shape(lam), complex),
                        hilbert=lambda x: np.zeros_like(x))


def random_corpus(count: int = 10, seed: int = 0) -> list[TestFunction]:
    """Seeded sums of ``a x^2 exp(-c x^2)`` with positive coefficients."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 4))
        a = rng.uniform(0.2, 1.5, size=k)
        c = rng.uniform(0.3, 3.0, size=k)
        out.append(gaussian_moment_sum(a, c))
    return out


def standard_corpus(count: int = 10, seed: int = 0) -> list[TestFunction]:
    """``count - 2`` seeded Gaussian moments plus the bounded-tail and ``x e^-x`` profiles."""
    if count < 3:
        raise ValueError("count must be at least 3")
    return random_corpus(count - 2, seed) + [bounded_tail(), x_exp()]


# ---------------------------------------------------------------------------
# Mellin transform

@dataclass(frozen=True)
class MellinSpectrum:
    delta: float
    lam: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def dlam(self) -> float:
        return float(self.lam[1] - self.lam[0])


def lambda_grid(lambda_max: float = 60.0, dlam: float = 0.01) -> np.ndarray:
    m = int(round(lambda_max / dlam))
    return np.arange(-m, m + 1) * dlam


def _log_window(g: Callable[[np.ndarray], np.ndarray], tol: float, du: float):
    """Smallest window [u_min, u_max] (multiples of du) outside which |g| < tol * peak."""
    u = np.arange(-200.0, 200.0 + 0.25, 0.25)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        vals = np.abs(g(u))
    vals = np.where(np.isfinite(vals), vals, np.nan)
    if np.all(np.nan_to_num(vals) == 0):
        return None
    peak = np.nanmax(vals)
    big = np.nonzero(~(vals < tol * peak))[0]
    lo, hi = big[0], big[-1]
    if lo == 0 or hi == u.size - 1:
        raise MellinTruncationError("integrand envelope does not fall below tolerance")
    u_min = math.floor(u[lo - 1] / du) * du
    u_max = math.ceil(u[hi + 1] / du) * du
    return u_min, u_max


def mellin_transform(f: TestFunction, delta: float, lam: np.ndarray,
                     du: float = 0.01, tol: float = 1e-12) -> MellinSpectrum:
    """Trapezoid rule in ``u = log xi`` for ``F(lam)``."""
    _check_delta(delta)
    lam = np.asarray(lam, dtype=float)
    w = 0.5 + 0.5 * delta

    def g(u):
        return np.exp(-w * u) * f(np.exp(u))

    win = _log_window(g, tol, du)
    if win is None:
        return MellinSpectrum(delta, lam, np.zeros(lam.shape, complex))
    u = np.arange(round(win[0] / du), round(win[1] / du) + 1) * du
    gu = g(u) * du
    gu[0] *= 0.5
    gu[-1] *= 0.5
    out = np.empty(lam.shape, complex)
    chunk = max(1, 4_000_000 // u.size)
    for i in range(0, lam.size, chunk):
        out[i:i + chunk] = np.exp(1j * np.outer(lam[i:i + chunk], u)) @ gu
    return MellinSpectrum(delta, lam, out)


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def _sech(b):
    e = np.exp(-np.abs(b))
    return 2.0 * e / (1.0 + e * e)


def multiplier_M(lam, delta: float):
    """``M(lam) = z (1 - cos conj z) / sin conj z`` with ``z = (1/2 + delta/2) pi + i lam pi``.

    Evaluated in the form divided through by ``cosh b``, which stays finite
    for any ``lam``.
    """
    _check_delta(delta)
    a = (0.5 + 0.5 * delta) * math.pi
    b = np.pi * np.asarray(lam, dtype=float)
    sech = _sech(b)
    den = 1.0 + math.cos(a) * sech
    re = (a * math.sin(a) * sech + b * np.tanh(b)) / den
    im = (-a * np.tanh(b) + b * math.sin(a) * sech) / den
    return re + 1j * im


# ---------------------------------------------------------------------------
# the two sides of the inequality

def lhs_mellin(spec: MellinSpectrum, resolve_tol: float = 1e-10) -> float:
    """``(1 / 2 pi^2) int Re M(lam) |F(lam)|^2 d lam``."""
    a2 = np.abs(spec.values) ** 2
    peak = np.sqrt(a2.max()) if a2.size else 0.0
    if peak == 0.0:
        return 0.0
    edge = max(abs(spec.values[0]), abs(spec.values[-1]))
    if edge > resolve_tol * peak:
        raise UnresolvedSpectrumError(
            f"|F| at the lambda-grid ends is {edge / peak:.2e} of its peak")
    integrand = multiplier_M(spec.lam, spec.delta).real * a2
    return float(integrate.trapezoid(integrand, spec.lam) / (2 * math.pi**2))


def plancherel_norm(spec: MellinSpectrum) -> float:
    """``(1 / 2 pi) int |F|^2 d lam``."""
    return float(integrate.trapezoid(np.abs(spec.values) ** 2, spec.lam) / (2 * math.pi))


def rhs_weighted(f: TestFunction, delta: float, du: float = 0.005, tol: float = 1e-14) -> float:
    """``int_0^inf f^2 x^(-2-delta) dx`` by the trapezoid rule in ``log x``."""
    _check_delta(delta)
    if not f.vanishes_at_zero:
        raise ValueError(f"{f.name}: f(0) != 0, weighted integral diverges")

    def g(u):
        return np.exp(-(1 + delta) * u) * f(np.exp(u)) ** 2

    win = _log_window(g, tol, du)
    if win is None:
        return 0.0
    u = np.arange(round(win[0] / du), round(win[1] / du) + 1) * du
    return float(integrate.trapezoid(g(u), u))


def hilbert_pv(f: TestFunction, x: float, eps0: Optional[float] = None,
               levels: int = 4, rtol: float = 1e-6) -> float:
    """Whole-line ``Hf(x)`` for even ``f`` at ``x > 0``.

    ``(1/pi) PV int_0^inf f(xi) 2x / (x^2 - xi^2) d xi``, with a symmetric hole
    of radius ``eps`` around ``xi = x`` and Richardson extrapolation of
    ``eps -> 0`` (the excised part is odd in ``eps``).  Two successive
    extrapolants must agree to ``rtol``.
    """
    if x <= 0:
        if x == 0:
            return 0.0
        return -hilbert_pv(f, -x, eps0, levels, rtol)
    if eps0 is None:
        eps0 = 0.25 * min(x, 1.0)
    fx = f.f

    def kern(xi):
        return fx(np.array([xi]))[0] * 2 * x / (x * x - xi * xi)

    opts = dict(limit=200, epsabs=1e-14, epsrel=1e-12)
    outer = integrate.quad(kern, 0.0, x - eps0, **opts)[0]
    upper = f.x_max if not f.bounded_tail else np.inf
    if x + eps0 < upper:
        outer += integrate.quad(kern, x + eps0, upper, **opts)[0]
    vals = [outer]
    eps = eps0
    for _ in range(levels):
        lo = eps / 2
        # the two halves of the shell eps/2 < |xi - x| < eps, folded together
        shell = integrate.quad(lambda s: kern(x - s) + kern(x + s), lo, eps, **opts)[0]
        vals.append(vals[-1] + shell)
        eps = lo
    table = [np.array(vals)]
    for k in range(1, levels + 1):
        prev = table[-1]
        fac = 2.0 ** (2 * k - 1)
        table.append((fac * prev[1:] - prev[:-1]) / (fac - 1))
    best, second = table[-1][-1], table[-2][-1]
    scale = max(abs(best), 1e-12)
    if abs(best - second) > rtol * scale:
        raise PVConvergenceError(
            f"PV extrapolation at x={x:g} unconverged: {best!r} vs {second!r}")
    return float(best / math.pi)


def lhs_direct(f: TestFunction, delta: float, epsrel: float = 1e-8) -> float:
    """``-int_0^inf f'(x) Hf(x) x^(-1-delta) dx`` with ``Hf`` by PV quadrature.

    The outer integral uses the algebraic-weight rule for ``x^(-delta)``.
    """
    _check_delta(delta)

    def h(x):
        if x == 0.0:
            return 0.0
        fp = float(f.derivative(np.array([x]))[0])
        if fp == 0.0:
            return 0.0
        return -fp * hilbert_pv(f, x) / x

    val, _ = integrate.quad(h, 0.0, f.x_max, weight="alg", wvar=(-delta, 0.0),
                            limit=200, epsrel=epsrel, epsabs=1e-13)
    return float(val)


# ---------------------------------------------------------------------------
# constants and reports

def best_constant(delta: float, lambda_max: float = 60.0, dlam: float = 1e-3) -> float:
    """``(1/pi) min_{|lam| <= lambda_max} Re M(lam)``: a dense scan refined locally."""
    lam = np.arange(0.0, lambda_max + dlam / 2, dlam)
    re = multiplier_M(lam, delta).real
    i = int(np.argmin(re))
    if i == lam.size - 1:
        warnings.warn("minimum of Re M sits at the scan boundary", RuntimeWarning, stacklevel=2)
        return float(re[i] / math.pi)
    lo, hi = lam[max(i - 1, 0)], lam[min(i + 1, lam.size - 1)]
    res = optimize.minimize_scalar(lambda l: multiplier_M(l, delta).real,
                                   bounds=(lo, hi), method="bounded",
                                   options=dict(xatol=1e-12))
    return float(min(res.fun, re[i]) / math.pi)


def argmin_re_M(delta: float, lambda_max: float = 60.0, dlam: float = 1e-3) -> float:
    lam = np.arange(0.0, lambda_max + dlam / 2, dlam)
    re = multiplier_M(lam, delta).real
    i = int(np.argmin(re))
    if 0 < i < lam.size - 1:
        res = optimize.minimize_scalar(lambda l: multiplier_M(l, delta).real,
                                       bounds=(lam[i - 1], lam[i + 1]), method="bounded",
                                       options=dict(xatol=1e-12))
        return float(res.x)
    return float(lam[i])


@dataclass(frozen=True)
class LemmaReport:
    name: str
    delta: float
    lhs_direct: float
    lhs_mellin: float
    rhs: float
    plancherel: float
    ratio: float
    c_delta: float
    passed: bool
    degenerate: bool = False

    @property
    def cross_rel_err(self) -> float:
        if self.lhs_mellin == 0:
            return 0.0 if self.lhs_direct == 0 else math.inf
        return abs(self.lhs_direct - self.lhs_mellin) / abs(self.lhs_mellin)

    @property
    def plancherel_rel_err(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.plancherel == 0 else math.inf
        return abs(self.plancherel - self.rhs) / self.rhs

    @classmethod
    def columns(cls) -> list[str]:
        return ["name", "delta", "lhs_direct", "lhs_mellin", "rhs", "plancherel", "ratio",
                "c_delta", "cross_rel_err", "plancherel_rel_err", "passed", "degenerate"]

    def as_row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


def verify_inequality(f: TestFunction, delta: float, lam: Optional[np.ndarray] = None,
                      c_delta: Optional[float] = None, rel_tol: float = 1e-2,
                      plancherel_tol: float = 5e-3) -> LemmaReport:
    """Evaluate both sides of the inequality and both representations of its left side.

    ``passed`` requires ``lhs/rhs >= C_delta (1 - rel_tol)``, agreement of the
    direct and Mellin left sides within ``rel_tol`` and of the Plancherel norm
    with the weighted right side within ``plancherel_tol``.
    """
    if lam is None:
        lam = lambda_grid()
    if c_delta is None:
        c_delta = best_constant(delta, float(np.max(np.abs(lam))))
    spec = mellin_transform(f, delta, lam)
    lm = lhs_mellin(spec)
    rhs = rhs_weighted(f, delta)
    if rhs == 0.0:
        ld = lhs_direct(f, delta) if np.any(f.f(np.linspace(0, f.x_max, 64)) != 0) else 0.0
        return LemmaReport(f.name, delta, ld, lm, 0.0, plancherel_norm(spec), math.nan,
                           c_delta, True, degenerate=True)
    ld = lhs_direct(f, delta)
    ratio = ld / rhs
    pl = plancherel_norm(spec)
    ok = (ratio >= c_delta * (1 - rel_tol) and abs(ld - lm) <= rel_tol * abs(lm)
          and abs(pl - rhs) <= plancherel_tol * rhs)
    return LemmaReport(f.name, delta, ld, lm, rhs, pl, ratio, c_delta, bool(ok))

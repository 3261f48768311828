"""Periodic grid and Fourier-multiplier operators.

The whole line is approximated by the box ``[-P, P)`` sampled at ``n``
equispaced nodes.  All operators act through ``numpy.fft.rfft`` with the
wavenumbers ``k_m = m * pi / P``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "RealField",
    "make_grid",
    "field_from_function",
    "refined_max_abs",
    "hilbert",
    "frac_laplacian",
    "deriv",
    "dealias",
    "hilbert_identity_residual",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-P, P)`` with ``n`` nodes."""

    n: int
    half_length: float

    def __post_init__(self):
        n = self.n
        if int(n) != n or n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {n!r}")
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive, got {self.half_length!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + np.arange(self.n) * self.dx
        x.setflags(write=False)
        return x

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers m in [-n/2, n/2), FFT ordering."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        m.setflags(write=False)
        return m

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers of the full FFT, FFT ordering."""
        k = self.modes * (np.pi / self.half_length)
        k.setflags(write=False)
        return k

    @cached_property
    def rm(self) -> np.ndarray:
        """Nonnegative mode numbers 0..n/2 of the real FFT."""
        m = np.arange(self.n // 2 + 1)
        m.setflags(write=False)
        return m

    @cached_property
    def rk(self) -> np.ndarray:
        """Nonnegative wavenumbers of the real FFT."""
        k = self.rm * (np.pi / self.half_length)
        k.setflags(write=False)
        return k

    @cached_property
    def zero_index(self) -> int:
        """Index of the node x = 0."""
        return self.n // 2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = self.rm <= self.n / 3.0
        mask.setflags(write=False)
        return mask

    # multipliers on the rfft half-spectrum -------------------------------
    @cached_property
    def hilbert_symbol(self) -> np.ndarray:
        s = -1j * np.ones(self.rm.size)
        s[0] = 0.0
        s[-1] = 0.0  # Nyquist
        s.setflags(write=False)
        return s

    @cached_property
    def deriv_symbol(self) -> np.ndarray:
        s = 1j * self.rk
        s[-1] = 0.0
        s.setflags(write=False)
        return s

    def frac_symbol(self, alpha: float) -> np.ndarray:
        _check_alpha(alpha)
        return np.abs(self.rk) ** alpha

    def rfft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft(values)

    def irfft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfft(coeffs, n=self.n)

    def evaluate(self, coeffs: np.ndarray, pts) -> np.ndarray:
        """Trigonometric interpolant with rfft ``coeffs`` evaluated at arbitrary ``pts``."""
        pts = np.atleast_1d(np.asarray(pts, dtype=float))
        w = np.full(coeffs.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        ph = np.exp(1j * np.outer(pts + self.half_length, self.rk))
        return (ph @ (w * coeffs)).real / self.n

    def sobolev_sq(self, coeffs: np.ndarray, s: float) -> float:
        """``||Lambda^s f||^2`` from rfft coefficients via Parseval."""
        c2 = np.abs(coeffs / self.n) ** 2
        w = np.full(c2.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        if s == 0:
            kp = np.ones(c2.size)
        else:
            kp = self.rk ** (2.0 * s)
        return float(2.0 * self.half_length * np.sum(w * kp * c2))


def make_grid(n: int, P: float) -> Grid:
    return Grid(n, float(P))


def _check_alpha(alpha):
    if not (0.0 <= alpha <= 2.0):
        raise ValueError(f"alpha must lie in [0, 2], got {alpha!r}")


@dataclass(frozen=True)
class RealField:
    """Real samples on a grid.  Immutable: the value array is read-only."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def mean(self) -> float:
        return float(np.mean(self.values))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.grid.dx))

    def _new(self, values):
        return RealField(self.grid, values)

    def __add__(self, other):
        return self._new(self.values + _vals(other))

    def __sub__(self, other):
        return self._new(self.values - _vals(other))

    def __mul__(self, other):
        return self._new(self.values * _vals(other))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.values)


def _vals(obj):
    return obj.values if isinstance(obj, RealField) else obj


def refined_max_abs(grid: Grid, coeffs: np.ndarray) -> float:
    """``max |f|`` of the trigonometric interpolant, refined around the grid maximiser."""
    from scipy.optimize import minimize_scalar

    v = grid.irfft(coeffs)
    i = int(np.argmax(np.abs(v)))
    best = abs(float(v[i]))
    if best == 0.0:
        return 0.0
    x0 = grid.x[i]
    res = minimize_scalar(lambda s: -abs(grid.evaluate(coeffs, s)[0]),
                          bounds=(x0 - grid.dx, x0 + grid.dx), method="bounded",
                          options={"xatol": 1e-10 * grid.dx})
    return max(best, float(-res.fun))


def field_from_function(grid: Grid, func) -> RealField:
    return RealField(grid, func(grid.x))


def _apply(f: RealField, symbol: np.ndarray) -> RealField:
    g = f.grid
    return RealField(g, g.irfft(g.rfft(f.values) * symbol))


def hilbert(f: RealField) -> RealField:
    """Periodic Hilbert transform, symbol ``-i sign(k)``.

    The mean and the Nyquist mode are annihilated.
    """
    return _apply(f, f.grid.hilbert_symbol)


def frac_laplacian(f: RealField, alpha: float) -> RealField:
    """``Lambda^alpha f`` with symbol ``|k|^alpha`` (identity at alpha = 0)."""
    return _apply(f, f.grid.frac_symbol(alpha))


def deriv(f: RealField) -> RealField:
    return _apply(f, f.grid.deriv_symbol)


def dealias(f: RealField) -> RealField:
    """Two-thirds rule: zero every mode with ``|m| > n/3``."""
    return _apply(f, f.grid.dealias_mask)


def hilbert_identity_residual(f: RealField) -> float:
    """Max-norm defect of ``2 H(f Hf) = (Hf)^2 - f^2`` up to its mean."""
    hf = hilbert(f)
    lhs = 2.0 * hilbert(dealias(f * hf)).values
    rhs = dealias(hf * hf - f * f).values
    rhs = rhs - rhs.mean()
    return float(np.max(np.abs(lhs - rhs)))

"""Product integration against the singular weight ``x**(-power)`` on a grid.

Grid functions are interpolated by local polynomials through ``order``
consecutive nodes and integrated exactly (to round-off) against the
weight.  The first cell, where the weight is singular, uses the
factorisation ``g(x) = x**q * r(x)`` with ``q`` the known order of
vanishing of ``g`` at the origin and ``r`` a polynomial.
"""
from __future__ import annotations

import numpy as np

__all__ = ["weighted_integral"]

_GL_S, _GL_W = np.polynomial.legendre.leggauss(12)
_GL_S = 0.5 * (_GL_S + 1.0)
_GL_W = 0.5 * _GL_W


def _lagrange(offsets, s):
    """Lagrange basis on nodes ``offsets`` (C, p) at points ``s`` (C, Q) -> (C, Q, p)."""
    p = offsets.shape[1]
    o = offsets[:, None, :]
    s = s[:, :, None]
    out = np.ones(s.shape[:2] + (p,))
    for i in range(p):
        for m in range(p):
            if m != i:
                out[..., i] *= (s[..., 0] - o[..., m]) / (o[..., i] - o[..., m])
    return out


def weighted_integral(g, h, power, upper, vanish_order=1, order=6):
    """Approximate ``int_0^upper g(x) x**(-power) dx``.

    Parameters
    ----------
    g : array
        Samples ``g(j*h)`` for ``j = 0..N``.  ``g[0]`` must equal ``g(0) = 0``;
        it enters the stencils of the cells next to the origin.
    h : float
        Node spacing.
    power : float
        Weight exponent; ``power - vanish_order`` must be below 1.
    upper : float
        Upper limit, ``0 < upper <= N*h``.  Need not be a node.
    vanish_order : int
        ``g`` behaves like ``x**vanish_order`` at the origin.
    order : int
        Stencil size; the rule is exact for polynomials of degree
        ``order - 1`` (times ``x**vanish_order`` in the first cell).

    Returns
    -------
    float
    """
    g = np.asarray(g, dtype=float)
    N = g.size - 1
    p = int(order)
    if p < 2:
        raise ValueError("order must be at least 2")
    if N < p:
        raise ValueError(f"need at least {p + 1} samples")
    if not upper > 0:
        raise ValueError("upper limit must be positive")
    if upper > N * h * (1 + 1e-12):
        raise ValueError("upper limit beyond the sampled range")
    q = vanish_order
    if power - q >= 1:
        raise ValueError("integrand not integrable at the origin")
    ncell = max(int(np.ceil(upper / h - 1e-9)), 1)
    frac_last = upper / h - (ncell - 1)

    # first cell: g = x^q r(x), r through nodes 1..p (units of h)
    s_nodes = np.arange(1.0, p + 1.0)
    r_vals = g[1:p + 1] / (s_nodes * h) ** q
    coef = np.linalg.solve(np.vander(s_nodes, p, increasing=True), r_vals)
    top = frac_last if ncell == 1 else 1.0
    e = q - power + 1.0 + np.arange(p)
    first = h ** (q - power + 1.0) * np.sum(coef * top**e / e)
    if ncell == 1:
        return float(first)

    j = np.arange(1, ncell)
    start = np.clip(j - (p // 2 - 1), 0, N - p + 1)
    idx = start[:, None] + np.arange(p)[None, :]
    offsets = (idx - j[:, None]).astype(float)
    span = np.ones(j.size)
    span[-1] = frac_last
    s = _GL_S[None, :] * span[:, None]
    interp = np.einsum("cqi,ci->cq", _lagrange(offsets, s), g[idx])
    xq = (j[:, None] + s) * h
    rest = h * np.sum(span[:, None] * _GL_W[None, :] * interp * xq ** (-power))
    return float(first + rest)

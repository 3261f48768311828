"""
The weighted Hilbert inequality through the Mellin transform
============================================================

For f even with f(0) = 0, -int_0^inf f' Hf x^(-1-delta) dx is bounded below
by C_delta int_0^inf f^2 x^(-2-delta) dx.  The Mellin transform turns the
left side into a lambda-integral of Re M(lambda) |F(lambda)|^2, so C_delta is
the minimum of Re M over the real line, divided by pi.
"""

import numpy as np

from nonlocal_transport.mellin import (
    argmin_re_M,
    best_constant,
    gaussian_moment,
    multiplier_M,
    verify_inequality,
)

for delta in (0.25, 0.5, 0.75):
    lam = argmin_re_M(delta)
    print(f"delta = {delta}: C_delta = {best_constant(delta):.8f}, minimum at lambda = {lam:.4f}, "
          f"Re M(0)/pi = {multiplier_M(0.0, delta).real / np.pi:.4f}")

# Re M grows like pi |lambda| for large |lambda|.
for lam in (10.0, 100.0, 1000.0):
    print(f"Re M({lam:g}) / (pi lambda) = {multiplier_M(lam, 0.5).real / (np.pi * lam):.6f}")

# One profile, both representations of the left side.
r = verify_inequality(gaussian_moment(1.0), 0.5)
print(f"x^2 exp(-x^2): direct {r.lhs_direct:.8f}, Mellin {r.lhs_mellin:.8f}, "
      f"ratio lhs/rhs {r.ratio:.4f} >= C_delta {r.c_delta:.4f}: {r.passed}")

# Dilating f by s multiplies both sides by s^(1 + delta).
f = gaussian_moment(1.0)
r2 = verify_inequality(f.scaled(2.0), 0.5)
print(f"scaling by 2: lhs factor {r2.lhs_direct / r.lhs_direct:.6f}, 2^1.5 = {2**1.5:.6f}")

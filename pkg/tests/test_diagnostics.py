import math
from dataclasses import replace

import numpy as np
import pytest

from nonlocal_transport.diagnostics import (
    DiagRecord,
    JParams,
    NormalizationWarning,
    RecordBuilder,
    blow_up_fit,
    cauchy_schwarz_rhs,
    compute_norms,
    dj_rhs,
    energy_balance_residual,
    j_functional,
    monotonicity_report,
    positivity_integral,
    regular_records,
    riccati_ratios,
)
from nonlocal_transport.spectral import RealField, field_from_function, make_grid


def quartic(n=4096, P=8 * np.pi):
    g = make_grid(n, P)
    return field_from_function(g, lambda x: np.where(np.abs(x) < 1, (1 - x**2) ** 2, 0.0))


def rec(t, **kw):
    base = dict(t=t, l1=1.0, l2=1.0, linf=1.0, min_val=0.0, max_grad=1.0, hhalf=1.0, h1=1.0,
                h2=1.0, diss=0.0, cum_diss=0.0, pos_int=0.0, j_val=math.nan, dj_rhs=math.nan)
    base.update(kw)
    return DiagRecord(**base)


def positivity_double_sum(theta):
    """(1/2pi) sum_ij (a_i + a_j)(a_i - a_j)^2 K(x_i - x_j) dx^2 with the periodised kernel."""
    g = theta.grid
    a = theta.values
    d = g.x[:, None] - g.x[None, :]
    P = g.half_length
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (np.pi / (2 * P)) ** 2 / np.sin(np.pi * d / (2 * P)) ** 2
        F = (a[:, None] + a[None, :]) * (a[:, None] - a[None, :]) ** 2 * K
    ax = g.irfft(g.rfft(a) * g.deriv_symbol)
    np.fill_diagonal(F, 2 * a * ax**2)
    return F.sum() * g.dx**2 / (2 * np.pi)


class TestNorms:
    def test_cosine(self):
        g = make_grid(256, np.pi)
        r = compute_norms(field_from_function(g, np.cos), alpha=1.0, t=0.5)
        assert r.t == 0.5
        assert r.l1 == pytest.approx(4.0, rel=1e-3)  # trapezoid on |cos|, kinked
        assert r.l2 == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        assert r.linf == pytest.approx(1.0)
        assert r.min_val == pytest.approx(-1.0)
        assert r.max_grad == pytest.approx(1.0, rel=1e-12)
        assert r.hhalf == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert r.diss == pytest.approx(math.pi, rel=1e-12)
        assert r.cum_diss == 0.0 and math.isnan(r.j_val)

    def test_quartic_closed_forms(self):
        r = compute_norms(quartic(), alpha=1.0)
        assert r.l1 == pytest.approx(16 / 15, rel=1e-6)
        assert r.l2**2 == pytest.approx(256 / 315, rel=1e-6)
        assert r.linf == 1.0
        # max |d/dx (1-x^2)^2| = 8/(3 sqrt 3) at x = 1/sqrt 3
        assert r.max_grad == pytest.approx(8 / (3 * math.sqrt(3)), rel=1e-4)

    def test_sobolev_ordering(self):
        r = compute_norms(quartic(1024), alpha=1.5)
        assert r.hhalf < r.h1 < r.h2

    def test_positivity_integral_cosine_plus_mean(self):
        # theta = 1 + cos x: Lambda theta = cos x, int (1+cos)^2 cos = 2 pi
        g = make_grid(64, np.pi)
        f = field_from_function(g, lambda x: 1 + np.cos(x))
        assert positivity_integral(f) == pytest.approx(2 * np.pi, rel=1e-13)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_positivity_integral_matches_double_sum(self, seed):
        g = make_grid(128, 4.0)
        rng = np.random.default_rng(seed)
        c = rng.normal(size=3)
        f = field_from_function(g, lambda x: sum(ci * np.exp(-(x - s) ** 2) for ci, s in
                                                 zip(c, (-1.0, 0.3, 1.2))))
        assert positivity_integral(f) == pytest.approx(positivity_double_sum(f), rel=1e-8)


class TestJ:
    def test_quartic_anchor(self):
        # int_0^1 (2x^2 - x^4) x^(-3/2) dx = 4/3 - 2/7; the kink at x = 1 limits accuracy
        assert j_functional(quartic(), JParams(0.5, 1.0)) == pytest.approx(22 / 21, rel=1e-7)

    def test_other_delta_and_L(self):
        # delta = 0.25, L = 0.5: int_0^L (2x^2 - x^4) x^(-1.25)
        L = 0.5
        exact = 2 * L**1.75 / 1.75 - L**3.75 / 3.75
        assert j_functional(quartic(), JParams(0.25, L)) == pytest.approx(exact, rel=1e-12)

    def test_bounding_chain(self):
        th = quartic()
        p = JParams()
        r = compute_norms(th, 0.0)
        j = j_functional(th, p)
        assert j <= p.bound_factor * r.max_grad
        assert j**2 <= cauchy_schwarz_rhs(th, p)

    def test_cauchy_schwarz_anchor(self):
        # int_0^P (m - theta)^2 x^(-2.5): on [0,1] (2x^2-x^4)^2, beyond 1 it is 1
        P = 8 * np.pi
        inner = 4 / 2.5 - 4 / 4.5 + 1 / 6.5
        outer = (1 - P**-1.5) / 1.5
        p = JParams()
        assert cauchy_schwarz_rhs(quartic(), p) == pytest.approx(
            p.bound_factor * (inner + outer), rel=1e-5)

    def test_dj_rhs_positive_for_bump(self):
        assert dj_rhs(quartic(), JParams()) > 0

    def test_warns_when_unnormalised(self):
        th = 2.0 * quartic()
        with pytest.warns(NormalizationWarning):
            j_functional(th, JParams())

    @pytest.mark.parametrize("kw", [{"delta": 0.0}, {"delta": 1.0}, {"L": 0.0}])
    def test_params_validated(self, kw):
        with pytest.raises(ValueError):
            JParams(**kw)

    def test_bound_factor(self):
        assert JParams(0.5, 4.0).bound_factor == pytest.approx(4.0)


class TestRecordBuilder:
    def test_cumulative_dissipation_trapezoid(self):
        g = make_grid(64, np.pi)
        b = RecordBuilder(alpha=2.0, nu=1.0)
        r0 = b(0.0, field_from_function(g, np.cos))
        r1 = b(0.5, field_from_function(g, lambda x: 2 * np.cos(x)))
        assert r1.cum_diss == pytest.approx(0.25 * (r0.diss + r1.diss))

    def test_zero_profile_gives_zero_j(self):
        g = make_grid(64, np.pi)
        r = RecordBuilder(1.0, 0.0, JParams())(0.0, RealField(g, np.zeros(64)))
        assert r.j_val == 0.0 and r.dj_rhs == 0.0


class TestMonotonicity:
    def test_clean_series(self):
        rs = [rec(t, l1=1 - t, l2=1 - t) for t in (0.0, 0.1, 0.2)]
        assert monotonicity_report(rs, nu=0.0) == []

    def test_injected_uptick(self):
        rs = [rec(0.0), rec(0.1, l2=0.9), rec(0.2, l2=0.95), rec(0.3, l2=0.8)]
        v = monotonicity_report(rs, nu=0.0)
        assert [(x.kind, x.index) for x in v] == [("l2_increase", 2)]

    def test_pointwise_bounds(self):
        rs = [rec(0.0), rec(0.1, min_val=-1e-6, linf=1.1)]
        kinds = {x.kind for x in monotonicity_report(rs, nu=0.0)}
        assert kinds == {"min_below_zero", "max_exceeds_initial"}

    def test_budget(self):
        rs = [rec(0.0), rec(0.1, cum_diss=0.6)]
        assert [x.kind for x in monotonicity_report(rs, nu=1.0)] == ["dissipation_budget"]
        assert monotonicity_report(rs, nu=0.5) == []


class TestEnergyBalance:
    @staticmethod
    def series(h):
        t = np.arange(0, 1 + 1e-12, h)
        # E = e^{-2t}/2 with sink nu*diss = e^{-2t}
        return [rec(float(s), l2=math.exp(-s), diss=math.exp(-2 * s)) for s in t]

    def test_centered_second_order(self):
        e1 = energy_balance_residual(self.series(0.02), 1.0).max()
        e2 = energy_balance_residual(self.series(0.01), 1.0).max()
        assert 3.5 < e1 / e2 < 4.5

    def test_simpson_fourth_order(self):
        e1 = energy_balance_residual(self.series(0.04), 1.0, "simpson").max()
        e2 = energy_balance_residual(self.series(0.02), 1.0, "simpson").max()
        assert e1 < 1e-6
        assert 14 < e1 / e2 < 18

    def test_simpson_interior_only(self):
        s = self.series(0.1)
        assert energy_balance_residual(s, 1.0, "simpson").shape == (len(s) - 2,)

    def test_errors(self):
        with pytest.raises(ValueError):
            energy_balance_residual(self.series(0.5)[:2], 1.0)
        with pytest.raises(ValueError):
            energy_balance_residual([rec(0.0), rec(0.1), rec(0.3)], 1.0)
        with pytest.raises(ValueError):
            energy_balance_residual(self.series(0.1), 1.0, "euler")

    def test_regular_records(self):
        rs = [rec(0.0), rec(0.01), rec(0.015), rec(0.02)]
        assert [r.t for r in regular_records(rs, 0.01)] == [0.0, 0.01, 0.02]


class TestBlowUpFit:
    def test_exact_hyperbola(self):
        rs = [rec(t, max_grad=1 / (0.8 - t), j_val=2 / (0.9 - t)) for t in np.linspace(0, 0.5, 12)]
        fit = blow_up_fit(rs, m=10)
        assert fit.T_star == pytest.approx(0.8, rel=1e-12)
        assert fit.slope == pytest.approx(-1.0, rel=1e-12)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.T_star_j == pytest.approx(0.9, rel=1e-12)

    def test_missing_j(self):
        rs = [rec(t, max_grad=1 + t) for t in np.linspace(0, 1, 10)]
        assert math.isnan(blow_up_fit(rs).T_star_j)

    def test_rejects_decreasing(self):
        rs = [rec(t, max_grad=2 - t) for t in np.linspace(0, 1, 10)]
        with pytest.raises(ValueError, match="increasing"):
            blow_up_fit(rs)

    def test_window_checks(self):
        rs = [rec(t, max_grad=1 + t) for t in np.linspace(0, 1, 5)]
        with pytest.raises(ValueError):
            blow_up_fit(rs, m=10)
        with pytest.raises(ValueError):
            blow_up_fit(rs, m=2)

    def test_riccati_ratio_of_exact_solution(self):
        # J = 1/(1-t) solves J' = J^2; the discrete left ratio is (1-t)/(1-t-dt)
        rs = [rec(t, j_val=1 / (1 - t)) for t in (0.0, 0.1, 0.2)]
        assert riccati_ratios(rs) == pytest.approx([1 / 0.9, 0.9 / 0.8])

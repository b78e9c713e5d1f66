import math

import numpy as np
import pytest

from galdnls.lattice import LatticeGrid
from galdnls.models import Background
from galdnls.theory import (
    BackgroundNorms, BoundInapplicable, DataConstants, UnboundedLifespan, Variant, lifespan_condition_dnls,
    lifespan_condition_gal, lifespan_dnls, lifespan_gal, max_admissible, proximity_bound, proximity_constants,
    radius_rho_dnls, radius_rho_gal, radius_varrho_gal,
)

BG = BackgroundNorms(q0=0.3, sup=0.35, prime=0.05, second=0.02, deviation=0.04)


def grid_scan_root(g, hi, n=200001):
    # brute-force anchor: last admissible point of a fine uniform scan, then refined once
    T = np.linspace(0, hi, n)[1:]
    ok = np.array([g(t) <= 0 for t in T])
    k = np.nonzero(~ok)[0][0]
    T2 = np.linspace(T[k - 1], T[k], n)
    ok2 = np.array([g(t) <= 0 for t in T2])
    return T2[np.nonzero(~ok2)[0][0] - 1]


class TestRadii:
    def test_small_T_limit(self):
        for f in (lambda T: radius_rho_dnls(T, 0.7, BG, 1, 2, 2, 1), lambda T: radius_rho_gal(T, 0.7, BG, 1, 2, 1),
                  lambda T: radius_varrho_gal(T, 0.7, BG, 1, 2, 1)):
            assert f(1e-300) == pytest.approx(1.4, rel=1e-12)

    def test_zero_data(self):
        assert radius_rho_dnls(5.0, 0.0, BackgroundNorms.zero(), 1, 1, 1, 1) == 0.0

    def test_spot_value(self):
        # independent evaluation: 2 [1 + 0 + 2^{7/2} (1 + 0 + 1)^3]
        b = BackgroundNorms(q0=1.0, sup=1.0)
        assert radius_rho_dnls(1.0, 1.0, b, 1, 1, 1, 1) == pytest.approx(2 * (1 + 2**3.5 * 8), rel=1e-15)

    def test_gal_spot_values(self):
        b = BackgroundNorms(q0=0.5, sup=0.6, prime=0.1, second=0.2, deviation=0.05)
        p, mu, T, k = 2, 1.5, 0.3, 4.0
        base = 2**8 * p * (0.6 + 0.5 + 0.05) ** 5
        lin = 2 * (0.8 + math.sqrt(8) * 0.1 * math.sqrt(T))
        assert radius_rho_gal(T, 0.8, b, mu, p, k) == pytest.approx(lin + 2 * mu * (base + 2 * 0.5**4 * 0.1) * T)
        assert radius_varrho_gal(T, 0.8, b, mu, p, k) == pytest.approx(lin + 2 * mu * (base + 0.5**4 * 0.2) * T)

    def test_constant_background(self):
        b = BackgroundNorms(q0=0.5, sup=0.5)
        assert radius_rho_gal(1.0, 0.0, b, 1, 1, 1) == pytest.approx(2 * 2**6 * 1.0**3)

    def test_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            T, phi = rng.uniform(0.01, 3), rng.uniform(0, 2)
            vals = rng.uniform(0, 1, 5)
            b = BackgroundNorms(*vals)
            for f in (lambda *a: radius_rho_dnls(*a, 1.0, 2, 2, 1.0), lambda *a: radius_rho_gal(*a, 1.0, 2, 1.0),
                      lambda *a: radius_varrho_gal(*a, 1.0, 2, 1.0)):
                r0 = f(T, phi, b)
                assert f(1.1 * T, phi, b) > r0
                assert f(T, phi + 0.1, b) > r0
                for i in range(5):
                    bumped = BackgroundNorms(*[v + (0.1 if j == i else 0) for j, v in enumerate(vals)])
                    assert f(T, phi, bumped) >= r0


class TestLifespan:
    def test_dnls_root_properties(self):
        T = lifespan_dnls(0.5, BG, 1.0, 2.0, 2, 1.0)
        g = lambda t: lifespan_condition_dnls(t, 0.5, BG, 1.0, 2.0, 2, 1.0)
        assert abs(g(T)) <= 1e-10 and g(T * (1 + 1e-6)) > 0

    @pytest.mark.parametrize("variant", [Variant.X1, Variant.X2])
    def test_gal_root_properties(self, variant):
        T = lifespan_gal(0.5, BG, 1.0, 2, 1.0, variant)
        g = lambda t: lifespan_condition_gal(t, 0.5, BG, 1.0, 2, 1.0, variant)
        assert abs(g(T)) <= 1e-10 and g(T * (1 + 1e-6)) > 0

    def test_regression_anchor_dnls(self):
        g = lambda t: lifespan_condition_dnls(t, 0.5, BG, 1.0, 2.0, 2, 1.0)
        T = lifespan_dnls(0.5, BG, 1.0, 2.0, 2, 1.0)
        assert T == pytest.approx(grid_scan_root(g, 2 * T), rel=1e-8)

    def test_regression_anchor_gal(self):
        g = lambda t: lifespan_condition_gal(t, 0.5, BG, 1.0, 2, 1.0)
        T = lifespan_gal(0.5, BG, 1.0, 2, 1.0)
        assert T == pytest.approx(grid_scan_root(g, 2 * T), rel=1e-8)

    def test_unbounded(self):
        with pytest.raises(UnboundedLifespan):
            lifespan_dnls(0.5, BG, 0.0, 1.0, 1, 1.0)
        with pytest.raises(UnboundedLifespan):
            lifespan_gal(0.5, BG, 0.0, 1, 1.0)
        with pytest.raises(UnboundedLifespan):
            max_admissible(lambda t: -1.0, max_doublings=50)

    def test_monotone_in_data(self):
        Ts = [lifespan_dnls(a, BG, 1, 1, 1, 1) for a in (0.1, 0.2, 0.4)]
        assert Ts[0] > Ts[1] > Ts[2]

    def test_decreasing_in_q0(self):
        g = LatticeGrid.from_half_length(300, 1.0)
        Ts = []
        for q0 in (0.1, 0.14, 0.18, 0.2):
            bg = Background.constant(g, q0)
            Ts.append(lifespan_gal(q0 * 1.4142, bg, 1.0, 2, 1.0))
        assert all(a > b for a, b in zip(Ts, Ts[1:]))

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_scale_invariance(self, p):
        dc = DataConstants(1.0, 1.3, 0.8, 0.9, 0.4, 0.2, 0.3, p)
        vals = []
        for eps in (0.05, 0.3, 1.0, 2.0):
            d = dc.rescaled(eps)
            vals.append(lifespan_dnls(d.phi0_norm, d.background_norms(), 1.0, p, p, 1.0) * eps ** (2 * p))
            vals.append(lifespan_gal(d.phi0_norm, d.background_norms(), 1.0, p, 1.0, Variant.X2) * eps ** (2 * p))
        np.testing.assert_allclose(vals[0::2], vals[0], rtol=1e-6)
        np.testing.assert_allclose(vals[1::2], vals[1], rtol=1e-6)

    def test_data_constants_round_trip(self):
        dc = DataConstants.from_data(0.5, BG, 0.25, 2)
        b = dc.background_norms()
        assert dc.phi0_norm == pytest.approx(0.5)
        for name in ("q0", "sup", "prime", "second", "deviation"):
            assert getattr(b, name) == pytest.approx(getattr(BG, name), rel=1e-14)


class TestProximity:
    def make(self, p1=1, p2=1, C0=0.0):
        g = LatticeGrid.from_half_length(300, 1.0)
        bg = Background.constant(g, 0.1)
        return proximity_constants(0.1416, bg, 0.1416, p1, p2, C0=C0)

    @pytest.mark.parametrize("p1,p2", [(1, 1), (2, 2), (1, 3)])
    def test_feasible(self, p1, p2):
        pc = self.make(p1, p2)
        s1, s2 = pc.slack()
        assert s1 >= 0 and s2 >= 0
        assert s1 < 1e-9 and s2 < 1e-9

    def test_A_recomputed(self):
        pc = self.make()
        A1 = 2 * (pc.A0 + pc.mu * (2**6 * (pc.B0 + pc.B + pc.B2) ** 3 + pc.B**2 * pc.B3) * pc.M1)
        A2 = 2 * (pc.A0 + 2**3.5 * pc.K * (pc.B0 + pc.B2 + pc.B) ** 3 * pc.M2)
        assert pc.A1 == pytest.approx(A1, rel=1e-14) and pc.A2 == pytest.approx(A2, rel=1e-14)

    def test_C_at_zero(self):
        pc = self.make(C0=3.0)
        assert proximity_bound(pc, 0.0, pc.epsilon) == pytest.approx(3.0 * pc.epsilon**3)

    def test_C_matches_definition(self):
        pc = self.make()
        B, B0, B2, B3, A1, A2 = pc.B, pc.B0, pc.B2, pc.B3, pc.A1, pc.A2
        T = 0.5 * pc.T_c
        C = T * ((8 * (A1 + B0 + B) ** 2 * (A1 + B2) + 4 * B**2 * A1 + B**2 * B3)
                 + 2 * math.sqrt(2) * (A2 + B0 + B) ** 2 * (A2 + B2))
        assert pc.C_at(T) == pytest.approx(C, rel=1e-14)

    def test_outside_window(self):
        pc = self.make()
        with pytest.raises(BoundInapplicable):
            proximity_bound(pc, 2 * pc.T_c, pc.epsilon)
        with pytest.raises(BoundInapplicable):
            proximity_bound(pc, 0.5 * pc.T_c, 2 * pc.epsilon)

import numpy as np
import pytest

from galdnls.analytic import ic_sech_background
from galdnls.conserve import (
    ConservedMonitor, check_global_bound, e_al, e_al_complex, e_dnls, global_bound, p_modified,
)
from galdnls.integrate import IntegratorConfig, evolve
from galdnls.lattice import Boundary, ComplexField, IncompatibleFieldsError, LatticeGrid
from galdnls.models import Background, Model, ModelSpec


def rand(rng, g, s=1.0):
    return ComplexField(s * (rng.normal(size=g.n_nodes) + 1j * rng.normal(size=g.n_nodes)), g)


class TestFunctionals:
    def test_zero(self):
        g = LatticeGrid(10)
        assert e_al(g.zeros()) == 0 and e_dnls(g.zeros()) == 0

    def test_constant(self):
        g = LatticeGrid(12)
        c = 0.3 - 0.7j
        f = ComplexField(np.full(12, c), g)
        assert e_al(f) == pytest.approx(12 * abs(c) ** 2)
        assert e_dnls(f) == pytest.approx(12 * abs(c) ** 2)

    def test_e_al_real_on_random(self):
        g = LatticeGrid(50, 0.3)
        f = rand(np.random.default_rng(0), g)
        assert abs(e_al_complex(f).imag) <= 1e-12 * e_dnls(f)

    def test_e_al_dirichlet_rejected(self):
        with pytest.raises(ValueError):
            e_al(LatticeGrid(5, 1.0, Boundary.DIRICHLET).zeros())

    def test_p_modified_special_cases(self):
        g = LatticeGrid(20)
        rng = np.random.default_rng(1)
        bg = Background.constant(g, 0.5, 0.3)
        assert p_modified(g.zeros(), bg) == 0
        phi = rand(rng, g)
        assert p_modified(phi, Background.zero(g)) == pytest.approx(0.5 * np.sum(np.abs(phi.values) ** 2))

    def test_p_modified_weighting(self):
        g = LatticeGrid(20, 0.25, Boundary.DIRICHLET)
        bg = Background.constant(g, 0.5)
        v = np.zeros(20, complex)
        v[5] = 1.0
        phi = ComplexField(v, g)
        assert p_modified(phi, bg, h_weighted=True) == pytest.approx(0.25 * p_modified(phi, bg))

    def test_grid_mismatch(self):
        with pytest.raises(IncompatibleFieldsError):
            p_modified(LatticeGrid(6).zeros(), Background.constant(LatticeGrid(7), 1.0))

    def test_monitor(self):
        g = LatticeGrid(4)
        m = ConservedMonitor("E", e_dnls)
        for s in (1.0, 1.1, 0.95):
            m.observe(ComplexField(np.full(4, s), g))
        assert m.reference == 4.0 and m.max_rel_drift == pytest.approx(0.21)


class TestModifiedFlow:
    @pytest.mark.parametrize("boundary", [Boundary.PERIODIC, Boundary.DIRICHLET])
    def test_p_conserved_and_global_bound(self, boundary):
        # L = 300 keeps the disturbance away from the ends for t <= 50
        g = LatticeGrid.from_half_length(300, 1.0, boundary)
        q0 = 0.1
        bg = Background.constant(g, q0)
        phi0 = ic_sech_background(g, q0) - bg.zeta
        mon = ConservedMonitor.modified_power(bg)
        ts = evolve(phi0, ModelSpec.gdnls(p=2).modified(bg), IntegratorConfig(), 50.0, monitors=[mon],
                    sample_every=50, store_states=True)
        assert mon.max_rel_drift <= 1e-8
        for s in ts.states:
            assert check_global_bound(ComplexField(s, g), phi0, bg)
        assert global_bound(phi0, bg) > 0


class TestPRate:
    def setup(self, boundary):
        g = LatticeGrid(40, 0.5, boundary)
        rng = np.random.default_rng(3)
        v = rng.normal(size=40) + 1j * rng.normal(size=40)
        if boundary is Boundary.DIRICHLET:
            v[0] = v[-1] = 0
        z = 0.4 * np.exp(1j * np.linspace(0, 2, 40))
        bg = Background(ComplexField(z, g), 0.4)
        d = Model(ModelSpec.gdnls(p=2).modified(bg), g).rhs(v)
        return g, v + z, np.vdot(v + z, d).real

    def test_periodic_rate_vanishes(self):
        _, _, rate = self.setup(Boundary.PERIODIC)
        assert abs(rate) < 1e-12

    def test_dirichlet_rate_is_boundary_flux(self):
        # clamped Phi leaves W = zeta on the end nodes, so summation by parts keeps an edge term
        g, W, rate = self.setup(Boundary.DIRICHLET)
        flux = -g.kappa * np.imag(W[0] * np.conj(W[1]) + W[-1] * np.conj(W[-2]))
        assert rate == pytest.approx(flux, rel=1e-12)

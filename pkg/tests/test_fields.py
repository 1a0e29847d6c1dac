import numpy as np
import pytest

from geomech.errors import SingularPointError
from geomech.fields import (
    PhasePoint,
    closure_residuals,
    double_monopole,
    exotic_planar,
    flux_integral,
    from_callables,
    momentum_monopole_uniform_E,
    uniform_fields,
)


def random_points(seed, n, r_lo=1.5, r_hi=3.0, p_lo=1.5, p_hi=3.0):
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n):
        u, v = rng.normal(size=(2, 3))
        pts.append(PhasePoint(r=u / np.linalg.norm(u) * rng.uniform(r_lo, r_hi),
                              p=v / np.linalg.norm(v) * rng.uniform(p_lo, p_hi)))
    return pts


class TestDoubleMonopole:
    def test_unit_point(self):
        m = double_monopole(1.0, 2.0)
        s = m.sample(PhasePoint(r=[1, 0, 0], p=[0, 1, 0]))
        assert np.allclose(s.B, [1, 0, 0])
        assert np.allclose(s.kappa, [0, 2, 0])
        assert np.allclose(s.g, [0, 1, 0])

    def test_inverse_square_modulus(self):
        m = double_monopole(1.0, 1.0)
        s = m.sample(PhasePoint(r=[0, 0, 2], p=[0, 1, 0]))
        assert np.allclose(s.B, [0, 0, 0.25])

    def test_kappa_flux_quantized(self):
        m = double_monopole(1.0, 0.7)
        kappa = lambda p: m.sample(PhasePoint(r=[3, 0, 0], p=p)).kappa
        flux = flux_integral(kappa, center=[0, 0, 0], radius=1.0, quadrature_order=24)
        assert abs(flux - 4 * np.pi * 0.7) < 1e-6

    def test_needs_a_coupling(self):
        with pytest.raises(ValueError):
            double_monopole(0.0, 0.0)

    def test_singular_points_error(self):
        m = double_monopole(1.0, 1.0)
        with pytest.raises(SingularPointError):
            m.sample(PhasePoint(r=[0, 0, 0], p=[1, 0, 0]))
        with pytest.raises(SingularPointError):
            m.sample(PhasePoint(r=[1, 0, 0], p=[0, 0, 0]))

    def test_theta_zero_pure_magnetic(self):
        m = double_monopole(1.0, 0.0)
        for pt in random_points(3, 10):
            assert np.all(m.sample(pt).kappa == 0.0)

    def test_evaluation_is_pure(self):
        m = double_monopole(1.0, 1.0)
        pt = PhasePoint(r=[1.1, -0.3, 0.7], p=[0.4, 1.3, -0.9])
        s1, s2 = m.sample(pt), m.sample(pt)
        for name in ("E", "B", "kappa", "g", "mu", "q"):
            assert np.array_equal(getattr(s1, name), getattr(s2, name))


class TestMomentumMonopole:
    def test_switch_off(self):
        m = momentum_monopole_uniform_E(theta=0.0, E=[0, 1, 0])
        for pt in random_points(5, 10):
            assert np.all(m.sample(pt).kappa == 0.0)

    def test_unit_momentum_strength(self):
        m = momentum_monopole_uniform_E(theta=0.3, E=[0, 1, 0])
        s = m.sample(PhasePoint(r=[0, 0, 0], p=[0, 0, 1]))
        assert abs(np.linalg.norm(s.kappa) - 0.3) < 1e-15

    def test_closure_clean(self):
        m = momentum_monopole_uniform_E(theta=0.1, E=[0, 1, 0])
        for pt in random_points(6, 10):
            assert closure_residuals(m, pt, step=1e-3).max_abs() <= 1e-6


class TestExoticPlanar:
    def test_effective_mass(self):
        m = exotic_planar(m=1.0, e=1.0, theta=0.5, B=1.0)
        assert m.mstar([0.0, 0.0]) == pytest.approx(0.5)

    def test_critical_field(self):
        m = exotic_planar(m=1.0, e=1.0, theta=0.5, B=0.3)
        assert m.B_crit == pytest.approx(2.0)

    def test_switch_off_is_lorentz(self):
        # theta = 0, V = 0: xdot = p/m and pdot = e B eps xdot
        m = exotic_planar(m=2.0, e=1.0, theta=0.0, B=1.5)
        r = np.array([0.3, -0.2])
        p = np.array([0.7, 0.4])
        xd, pd = m.velocity(r, p)
        assert np.allclose(xd, p / 2.0, atol=1e-15)
        eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.allclose(pd, 1.5 * eps @ xd, atol=1e-15)

    def test_mass_must_be_positive(self):
        with pytest.raises(ValueError):
            exotic_planar(m=0.0, e=1.0, theta=0.5, B=1.0)

    def test_potential_gradient(self):
        m = exotic_planar(m=1.0, e=1.0, theta=0.1, B=0.0,
                          V=lambda r: r[0] ** 2 + 3.0 * r[1])
        E = m.E([0.5, 0.0])
        assert np.allclose(E, [-1.0, -3.0], atol=1e-8)


class TestClosure:
    def test_double_monopole_spec_point(self):
        m = double_monopole(1.0, 1.0)
        pt = PhasePoint(r=np.array([1.0, 1.0, 0.0]) / np.sqrt(2) * 2,
                        p=[0.0, 0.0, 3.0])
        assert closure_residuals(m, pt, step=1e-3).max_abs() <= 1e-6

    def test_uniform_fields_exact(self):
        m = uniform_fields(B=[0, 0, 1])
        res = closure_residuals(m, PhasePoint(r=[0.3, 0.2, -1.0], p=[1.0, 0.5, 0.2]),
                                step=1e-3)
        assert res.max_abs() <= 1e-12

    def test_violating_model_flagged(self):
        bad = from_callables("bad-B", B=lambda pt: np.array([pt.r[0], 0.0, 0.0]))
        res = closure_residuals(bad, PhasePoint(r=[0.5, 0.5, 0.5], p=[1, 0, 0]),
                                step=1e-3)
        assert res.divB == pytest.approx(1.0, abs=1e-9)

    def test_refinement_is_second_order(self):
        m = double_monopole(1.0, 1.0)
        checked = 0
        for pt in random_points(11, 20):
            r1 = closure_residuals(m, pt, step=1e-3)
            r2 = closure_residuals(m, pt, step=5e-4)
            # only residuals above the roundoff floor resolve the h^2 law
            if r1.max_abs() > 1e-10:
                assert 3.5 <= r1.max_abs() / r2.max_abs() <= 4.5
                checked += 1
        assert checked >= 15

    def test_stencil_near_exclusion_rejected(self):
        m = double_monopole(1.0, 1.0)
        with pytest.raises(SingularPointError):
            closure_residuals(m, PhasePoint(r=[5e-5, 0, 0], p=[1, 0, 0]), step=1e-4)

    def test_step_positive(self):
        m = double_monopole(1.0, 1.0)
        with pytest.raises(ValueError):
            closure_residuals(m, PhasePoint(r=[1, 0, 0], p=[0, 1, 0]), step=0.0)


class TestFlux:
    def test_unit_monopole(self):
        f = lambda x: x / np.linalg.norm(x) ** 3
        assert abs(flux_integral(f, [0, 0, 0], 1.0, 24) - 4 * np.pi) < 1e-8

    def test_divergence_free(self):
        f = lambda x: np.array([1.0, -2.0, 0.5])
        assert abs(flux_integral(f, [0, 0, 0], 1.3, 16)) < 1e-10

    def test_scaled_monopole_radius_two(self):
        f = lambda x: 0.5 * x / np.linalg.norm(x) ** 3
        assert abs(flux_integral(f, [0, 0, 0], 2.0, 24) - 2 * np.pi) < 1e-8

    def test_radius_independence(self):
        f = lambda x: 0.7 * x / np.linalg.norm(x) ** 3
        f1 = flux_integral(f, [0, 0, 0], 0.8, 24)
        f2 = flux_integral(f, [0, 0, 0], 2.5, 24)
        assert abs(f1 - f2) < 1e-8

    def test_radius_positive(self):
        with pytest.raises(ValueError):
            flux_integral(lambda x: x, [0, 0, 0], 0.0)


def test_mu_equal_one_is_reported():
    with pytest.warns(UserWarning):
        from geomech.fields import FieldSample
        FieldSample(E=[0, 0, 0], B=[0, 0, 0], kappa=[0, 0, 0], g=[0, 0, 0],
                    mu=[1.0, 0.0, 0.0], q=[0, 0, 0])

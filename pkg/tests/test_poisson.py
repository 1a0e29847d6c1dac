import math

import numpy as np
import pytest

from geomech.errors import DegenerateStructureError, SingularPointError
from geomech.fields import PhasePoint, double_monopole
from geomech.linalg import eps_matrix, hat_matrix, pfaffian
from geomech.poisson import (
    Observable,
    angular_momentum,
    bracket,
    cosymplectic_double_monopole,
    cosymplectic_general,
    cosymplectic_planar,
    critical_bracket_closed_form,
    critical_bracket_residual,
    desingularized_double_monopole,
    j_norm_identity_residual,
    jacobi_residual,
    mstar_scalar,
)
from geomech.twoform import assemble_sigma


def regular_points(seed, n, e=1.0, theta=1.0, lo=0.8, hi=2.0, min_mrel=0.1):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        u, v = rng.normal(size=(2, 3))
        r = u / np.linalg.norm(u) * rng.uniform(lo, hi)
        p = v / np.linalg.norm(v) * rng.uniform(lo, hi)
        big = np.linalg.norm(r) ** 3 * np.linalg.norm(p) ** 3
        if abs(big - e * theta * r @ p) / big >= min_mrel:
            out.append(PhasePoint(r=r, p=p))
    return out


def eps_sym(i, j, k):
    return int((i - j) * (j - k) * (k - i) / 2) if len({i, j, k}) == 3 else 0


class TestDoubleMonopoleStructure:
    def test_spec_point_entries(self):
        pt = PhasePoint(r=[1, 0, 0], p=[0, 1, 0])
        w = cosymplectic_double_monopole(pt, 1.0, 1.0)
        assert w.degeneracy_factor == pytest.approx(1.0)
        # {r1, p1} entry: |r|^3 |p|^3 + e theta correction vanishing here
        assert w.A[0, 3] == pytest.approx(1.0)
        # {p1, p2} = e |p|^3 eps_12k r_k / M* = 0 at this point (r3 = 0)
        assert w.A[3, 4] == pytest.approx(0.0, abs=1e-15)

    def test_canonical_switch_off(self):
        pt = PhasePoint(r=[1.3, -0.2, 0.4], p=[0.5, 1.1, -0.7])
        w = cosymplectic_double_monopole(pt, 0.0, 0.0)
        arr = w.A.array
        assert np.allclose(arr[0:3, 3:6], np.eye(3), atol=1e-15)
        assert np.allclose(arr[0:3, 0:3], 0.0, atol=1e-15)
        assert np.allclose(arr[3:6, 3:6], 0.0, atol=1e-15)

    def test_inverts_the_phase_block(self):
        model = double_monopole(1.0, 1.0)
        for pt in regular_points(12, 25):
            w = cosymplectic_double_monopole(pt, 1.0, 1.0).A.array
            phase = assemble_sigma(model.sample(pt), e=1.0).A.array[0:6, 0:6]
            assert np.allclose(w @ phase, np.eye(6), atol=1e-9 * np.max(np.abs(w)))

    def test_pfaffian_identity(self):
        for pt in regular_points(13, 100, min_mrel=0.02):
            w = cosymplectic_double_monopole(pt, 1.0, 1.0)
            big = np.linalg.norm(pt.r) ** 3 * np.linalg.norm(pt.p) ** 3
            expect = big / abs(w.degeneracy_factor)
            assert abs(pfaffian(w.A)) == pytest.approx(expect, rel=1e-10)

    def test_pfaffian_sign_constant_per_component(self):
        signs_pos, signs_neg = set(), set()
        for pt in regular_points(14, 60, min_mrel=0.02):
            w = cosymplectic_double_monopole(pt, 1.0, 1.0)
            s = np.sign(pfaffian(w.A))
            (signs_pos if w.degeneracy_factor > 0 else signs_neg).add(s)
        assert len(signs_pos) == 1
        assert len(signs_neg) <= 1

    def test_degenerate_on_manifold(self):
        r = np.array([1.0, 0.0, 0.0])
        p = math.sqrt(1.0) * r / (r @ r)
        with pytest.raises(DegenerateStructureError):
            cosymplectic_double_monopole(PhasePoint(r=r, p=p), 1.0, 1.0)

    def test_singular_origin(self):
        with pytest.raises(SingularPointError):
            cosymplectic_double_monopole(PhasePoint(r=[0, 0, 0], p=[1, 0, 0]), 1, 1)


class TestGeneralFormula:
    def test_all_zero_is_canonical(self):
        w = cosymplectic_general(np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3)))
        assert w.degeneracy_factor == pytest.approx(1.0)
        assert np.allclose(w.A.array[0:3, 3:6], np.eye(3))

    def test_planar_embedding_reproduces_exotic_brackets(self):
        e, theta, B = 1.0, 0.5, 1.2
        w = cosymplectic_general(np.zeros((3, 3)),
                                 e * hat_matrix(np.array([0, 0, B])),
                                 eps_matrix(np.array([0, 0, theta])))
        ms = 1.0 - e * theta * B  # m* / m with unit mass
        arr = w.A.array
        assert arr[0, 1] == pytest.approx(theta / ms)
        assert arr[3, 4] == pytest.approx(e * B / ms)
        assert arr[0, 3] == pytest.approx(1.0 / ms)

    def test_matches_double_monopole_entrywise(self):
        e, theta = 1.0, 1.0
        for pt in regular_points(15, 30):
            B = pt.r / np.linalg.norm(pt.r) ** 3
            kap = theta * pt.p / np.linalg.norm(pt.p) ** 3
            w1 = cosymplectic_general(np.zeros((3, 3)), e * hat_matrix(B),
                                      eps_matrix(kap))
            w2 = cosymplectic_double_monopole(pt, e, theta)
            scale = np.max(np.abs(w2.A.array))
            assert np.allclose(w1.A.array, w2.A.array, rtol=1e-10, atol=1e-12 * scale)

    def test_degenerate_factor_rejected(self):
        # b kappa with trace 2 makes the factor vanish: use axial pair u.v = 1
        u = np.array([0, 0, 1.0])
        with pytest.raises(DegenerateStructureError):
            cosymplectic_general(np.zeros((3, 3)), hat_matrix(u), eps_matrix(u))


class TestPlanarStructure:
    def test_exotic_bracket_values(self):
        w = cosymplectic_planar(B=1.0, e=1.0, theta=0.5)
        arr = w.A.array
        ms = 0.5
        assert arr[0, 1] == pytest.approx(0.5 / ms)   # {x1, x2} = m theta / m*
        assert arr[2, 3] == pytest.approx(1.0 / ms)   # {p1, p2} = m e B / m*
        assert arr[0, 2] == pytest.approx(1.0 / ms)   # {x1, p1} = m / m*
        assert w.degeneracy_factor == pytest.approx(ms)

    def test_critical_field_rejected(self):
        with pytest.raises(DegenerateStructureError):
            cosymplectic_planar(B=2.0, e=1.0, theta=0.5)


class TestBracket:
    def test_canonical_pair(self):
        pt = PhasePoint(r=[0.3, 0.1, -0.2], p=[1.0, 0.5, 0.25])
        w = cosymplectic_double_monopole(pt, 0.0, 0.0)
        val = bracket(lambda q: q.r[0], lambda q: q.p[0], pt, w)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_angular_momentum_algebra(self):
        e = theta = 1.0
        for pt in regular_points(16, 25):
            w = cosymplectic_double_monopole(pt, e, theta)
            jv = angular_momentum(pt, e, theta)
            for i in range(3):
                for k in range(i + 1, 3):
                    val = bracket(lambda q, i=i: angular_momentum(q, e, theta)[i],
                                  lambda q, k=k: angular_momentum(q, e, theta)[k],
                                  pt, w)
                    expect = sum(eps_sym(i, k, l) * jv[l] for l in range(3))
                    assert val == pytest.approx(expect, abs=1e-6)

    def test_angular_momentum_commutes_with_h(self):
        e = theta = 1.0
        h = Observable("H", lambda q: 0.5 * float(q.p @ q.p))
        for pt in regular_points(17, 25):
            w = cosymplectic_double_monopole(pt, e, theta)
            for i in range(3):
                val = bracket(lambda q, i=i: angular_momentum(q, e, theta)[i], h,
                              pt, w)
                assert abs(val) <= 1e-8

    def test_bilinearity_and_leibniz(self):
        pt = PhasePoint(r=[1.1, 0.4, -0.3], p=[0.7, -1.2, 0.5])
        w = cosymplectic_double_monopole(pt, 1.0, 1.0)
        f = lambda q: q.r[0] * q.p[1]
        g = lambda q: q.p[2] ** 2
        h = lambda q: q.r[2] + 2.0 * q.p[0]
        lhs = bracket(lambda q: f(q) + 3.0 * g(q), h, pt, w)
        rhs = bracket(f, h, pt, w) + 3.0 * bracket(g, h, pt, w)
        assert lhs == pytest.approx(rhs, abs=1e-6)
        lhs = bracket(lambda q: f(q) * g(q), h, pt, w)
        rhs = f(pt) * bracket(g, h, pt, w) + g(pt) * bracket(f, h, pt, w)
        assert lhs == pytest.approx(rhs, abs=1e-6)

    def test_planar_finite_difference_brackets(self):
        w = cosymplectic_planar(B=1.0, e=1.0, theta=0.5)
        z = np.array([0.2, -0.1, 0.8, 0.3])
        val = bracket(lambda y: y[0], lambda y: y[1], z, w)
        assert val == pytest.approx(1.0, abs=1e-10)  # m theta / m* = 1.0

    def test_step_positive(self):
        pt = PhasePoint(r=[1, 0, 0], p=[0, 1, 0])
        w = cosymplectic_double_monopole(pt, 1.0, 1.0)
        with pytest.raises(ValueError):
            bracket(lambda q: q.r[0], lambda q: q.p[0], pt, w, step=0.0)


class TestJacobi:
    def test_canonical(self):
        build = lambda pt: cosymplectic_double_monopole(pt, 0.0, 0.0)
        pt = PhasePoint(r=[0.9, 0.2, -0.5], p=[1.2, 0.3, 0.8])
        assert jacobi_residual(build, pt) <= 1e-9

    def test_double_monopole_generic(self):
        build = lambda pt: cosymplectic_double_monopole(pt, 1.0, 1.0)
        for pt in regular_points(18, 10, lo=1.0, hi=2.0, min_mrel=0.3):
            assert jacobi_residual(build, pt) <= 1e-5

    def test_planar_nonuniform_field(self):
        # position-dependent B keeps the Jacobi identity for any field
        def build(z):
            B = 0.8 + 0.3 * math.sin(z[0]) + 0.2 * z[1] ** 2
            return cosymplectic_planar(B, e=1.0, theta=0.4)
        z = np.array([0.4, -0.3, 0.6, 0.9])
        assert jacobi_residual(build, z) <= 1e-5

    def test_violation_grows_toward_the_locus(self):
        # away from p = 0 the identity holds exactly; a fixed-resolution probe
        # sees the delta-function violation once |p| approaches the stencil
        # scale, and from there the residual grows monotonically
        build = lambda pt: cosymplectic_double_monopole(pt, 1.0, 1.0)
        rng = np.random.default_rng(0)
        dirs = [u / np.linalg.norm(u) for u in rng.normal(size=(6, 3))]
        geomeans = []
        for d in (0.025, 0.0125, 0.00625, 0.003125):
            vals = [jacobi_residual(build, PhasePoint(r=[1.5, 0.2, 0.1], p=d * u),
                                    step=1e-4) for u in dirs]
            geomeans.append(np.exp(np.mean(np.log(vals))))
        assert geomeans[1] > geomeans[0]
        assert geomeans[2] > geomeans[1]
        assert geomeans[3] > geomeans[2]


class TestAngularMomentum:
    def test_spec_point(self):
        j = angular_momentum(PhasePoint(r=[1, 0, 0], p=[0, 1, 0]), 1.0, 1.0)
        assert np.allclose(j, [-1, -1, 1], atol=1e-15)

    def test_kinetic_limit(self):
        pt = PhasePoint(r=[0.6, -0.1, 0.8], p=[1.0, 0.4, -0.2])
        assert np.allclose(angular_momentum(pt, 0.0, 0.0),
                           np.cross(pt.r, pt.p), atol=1e-15)

    def test_parallel_minimal_modulus(self):
        r = np.array([0.7, -0.4, 1.1])
        pt = PhasePoint(r=r, p=2.5 * r)
        assert np.linalg.norm(angular_momentum(pt, 1.0, 1.0)) == pytest.approx(2.0)

    def test_singular(self):
        with pytest.raises(SingularPointError):
            angular_momentum(PhasePoint(r=[0, 0, 0], p=[1, 0, 0]), 1.0, 1.0)


class TestJNormIdentity:
    def test_random_points(self):
        for pt in regular_points(19, 30, min_mrel=0.0):
            res = j_norm_identity_residual(pt, 1.0, 2.0)
            j = angular_momentum(pt, 1.0, 2.0)
            assert abs(res) <= 1e-10 * max(1.0, float(j @ j))

    def test_negative_coupling_sign(self):
        for pt in regular_points(20, 30, e=1.0, theta=-2.0, min_mrel=0.0):
            res = j_norm_identity_residual(pt, 1.0, -2.0)
            j = angular_momentum(pt, 1.0, -2.0)
            assert abs(res) <= 1e-10 * max(1.0, float(j @ j))

    def test_parallel_case(self):
        r = np.array([1.0, 1.0, 0.0])
        pt = PhasePoint(r=r, p=0.7 * r)
        j = angular_momentum(pt, 1.0, 1.0)
        assert float(j @ j) == pytest.approx(4.0)
        assert abs(j_norm_identity_residual(pt, 1.0, 1.0)) <= 1e-12

    def test_perpendicular_case(self):
        pt = PhasePoint(r=[2.0, 0, 0], p=[0, 1.5, 0])
        j = angular_momentum(pt, 1.0, 1.0)
        rxp = np.cross(pt.r, pt.p)
        assert float(j @ j) == pytest.approx(float(rxp @ rxp) + 2.0)


class TestCriticalBracket:
    @staticmethod
    def manifold_point(seed, e=1.0, theta=1.0):
        rng = np.random.default_rng(seed)
        u = rng.normal(size=3)
        r = u / np.linalg.norm(u) * rng.uniform(0.8, 1.5)
        p = math.copysign(1.0, e * theta) * math.sqrt(abs(e * theta)) * r / (r @ r)
        return PhasePoint(r=r, p=p)

    def test_on_manifold_closed_form_vanishes(self):
        pt = self.manifold_point(3)
        assert abs(critical_bracket_closed_form(pt, 1.0, 1.0)) <= 1e-12

    def test_residual_small_on_manifold(self):
        for seed in range(5):
            pt = self.manifold_point(seed)
            res = critical_bracket_residual(pt, 1.0, 1.0)
            # scale of the individual bracket terms
            npp = np.linalg.norm(pt.p)
            scale = max(3.0 * npp**6 * np.linalg.norm(pt.r) ** 4, 1.0)
            assert abs(res) <= 1e-5 * scale

    def test_off_manifold_precondition(self):
        with pytest.raises(ValueError):
            critical_bracket_residual(PhasePoint(r=[1, 0, 0], p=[0, 1, 0]), 1.0, 1.0)

    def test_no_couplings_no_manifold(self):
        pt = self.manifold_point(4)
        with pytest.raises(ValueError):
            critical_bracket_residual(pt, 0.0, 0.0)

    def test_desingularized_times_inverse_mass(self):
        for pt in regular_points(22, 10):
            w = cosymplectic_double_monopole(pt, 1.0, 1.0)
            ws = desingularized_double_monopole(pt, 1.0, 1.0)
            assert np.allclose(ws / mstar_scalar(pt, 1.0, 1.0), w.A.array,
                               rtol=1e-12)

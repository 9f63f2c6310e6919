import numpy as np
import pytest

from gaugemech import bundle, liealg, poisson
from gaugemech.bundle import BundleSpec, ConnectionData
from gaugemech.poisson import (
    ChartError,
    ScalarField,
    bracket_property_suite,
    canonical_cotangent,
    coadjoint_orbit,
    coadjoint_transport,
    coordinate_field,
    dual_pair_check,
    groupoid_action_suite,
    jacobi_check,
    leaf_structure,
    lie_poisson,
    magnetic_term,
    product_space,
    quotient_cotangent,
    random_polynomial,
)


def so3_bundle(conn_matrix=None):
    g = liealg.so3()
    mat = np.array([[0.3, -0.1], [0.0, 0.2], [0.1, 0.4]]) if conn_matrix is None else conn_matrix
    return BundleSpec("TrivialProduct", g, ConnectionData.from_matrix(mat), base_box=[[-1.0, 1.0], [-1.0, 1.0]])


def u1_bundle():
    t1 = liealg.torus(1)
    terms = [[[(-0.5, (0, 1))]], [[(0.5, (1, 0))]]]
    return BundleSpec("TrivialProduct", t1, ConnectionData(2, 1, terms), base_box=[[-1.0, 1.0], [-1.0, 1.0]])


class TestBracketEval:
    def test_bracket_with_self_vanishes(self):
        lp = lie_poisson(liealg.so3())
        rng = np.random.default_rng(1)
        f = random_polynomial(rng, 3)
        x = rng.standard_normal(3)
        assert abs(lp.bracket(f, f, x)) <= 1e-14

    def test_so3_coordinate_functions(self):
        # structure-constants oracle: {mu_1, mu_2}(mu) = <mu, [e_1, e_2]> = mu_3
        lp = lie_poisson(liealg.so3())
        mu = np.array([0.4, -0.2, 0.9])
        val = lp.bracket(coordinate_field(0, 3), coordinate_field(1, 3), mu)
        assert abs(val - mu[2]) <= 1e-14

    def test_abelian_brackets_vanish(self):
        lp = lie_poisson(liealg.translation_group(3))
        rng = np.random.default_rng(2)
        f, g = random_polynomial(rng, 3), random_polynomial(rng, 3)
        assert abs(lp.bracket(f, g, rng.standard_normal(3))) <= 1e-14

    def test_canonical_closed_form(self):
        sp = canonical_cotangent(1)
        f = ScalarField(lambda x: float(x[0] ** 2), lambda x: np.array([2 * x[0], 0.0]))
        g = ScalarField(lambda x: float(x[1]), lambda x: np.array([0.0, 1.0]))
        x = np.array([0.7, -0.3])
        assert abs(sp.bracket(f, g, x) - 2 * x[0]) <= 1e-14

    def test_quotient_reduces_to_lie_poisson(self):
        # P = G: the faithful quotient bracket must reproduce the coalgebra bracket
        g = liealg.so3()
        b = BundleSpec("TrivialProduct", g, ConnectionData.flat(0, 3), base_box=np.zeros((0, 2)))
        q = quotient_cotangent(b)
        lp = lie_poisson(g)
        rng = np.random.default_rng(3)
        for _ in range(5):
            f, h = random_polynomial(rng, 3), random_polynomial(rng, 3)
            x = rng.standard_normal(3)
            assert abs(q.bracket(f, h, x) - lp.bracket(f, h, x)) <= 1e-10

    def test_product_space(self):
        sp = product_space([canonical_cotangent(1), lie_poisson(liealg.so3())])
        assert sp.dim == 5
        rng = np.random.default_rng(4)
        f, g = random_polynomial(rng, 5), random_polynomial(rng, 5)
        x = rng.standard_normal(5)
        manual = 0.0
        bvec = sp.bivector(x)
        manual = float(f.gradient(x) @ bvec @ g.gradient(x))
        assert abs(sp.bracket(f, g, x) - manual) <= 1e-9

    def test_out_of_chart(self):
        q = quotient_cotangent(so3_bundle())
        with pytest.raises(ChartError):
            q.bracket(coordinate_field(0, 7), coordinate_field(1, 7), np.concatenate([[5.0, 0.0], np.zeros(5)]))

    def test_properties_quantified(self):
        for sp in (lie_poisson(liealg.so3()), canonical_cotangent(2), quotient_cotangent(so3_bundle())):
            rep = bracket_property_suite(sp, trials=200, seed=5)
            assert rep.passed, (sp.name, rep.failures())


class TestJacobi:
    def test_canonical_quadratics(self):
        assert jacobi_check(canonical_cotangent(2), trials=10, seed=6) <= 1e-8

    def test_lie_poisson_linear(self):
        assert jacobi_check(lie_poisson(liealg.so3()), trials=10, seed=7, degree=1) <= 1e-10

    def test_quotient_fd_chain(self):
        assert jacobi_check(quotient_cotangent(so3_bundle()), trials=6, seed=8) <= 1e-6


class TestDualPair:
    def test_constant_functions_commute_exactly(self):
        b = so3_bundle()
        quot = quotient_cotangent(b)
        const_f = ScalarField(lambda x: 3.0, lambda x: np.zeros(quot.dim))
        const_h = ScalarField(lambda x: -1.0, lambda x: np.zeros(3))
        rng = np.random.default_rng(9)
        s = b.random_cotangent(rng)
        F = quot._lift(const_f)
        H = poisson.CotangentFn(lambda ss: const_h(ss.b), lambda ss: (np.zeros(2), np.zeros(3), np.zeros(2), np.zeros(3)))
        assert abs(poisson.cotangent_bracket(b, F, H, s)) == 0.0

    def test_polarity_suite(self):
        rep = dual_pair_check(so3_bundle(), trials=100, seed=10)
        assert rep.passed, rep.failures()
        assert rep.max_residual <= 1e-7


class TestOrbits:
    def test_zero_point_orbit(self):
        orb = coadjoint_orbit(liealg.so3(), np.zeros(3), seed=11)
        assert orb.dim == 0

    def test_so3_sphere(self):
        orb = coadjoint_orbit(liealg.so3(), np.array([0.0, 0.0, 1.0]), seed=12)
        assert orb.dim == 2
        # samples stay on the Casimir level set
        assert all(orb.membership_residual(s) <= 1e-10 for s in orb.samples)

    def test_abelian_orbits_are_points(self):
        orb = coadjoint_orbit(liealg.torus(2), np.array([0.3, -0.7]), seed=13)
        assert orb.dim == 0
        assert all(np.linalg.norm(s - orb.mu0) <= 1e-12 for s in orb.samples)

    def test_orbit_dimension_even(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            mu0 = rng.standard_normal(3)
            assert coadjoint_orbit(liealg.so3(), mu0, seed=15).dim % 2 == 0

    def test_transport(self):
        g = liealg.so3()
        rng = np.random.default_rng(16)
        mu1 = rng.standard_normal(3)
        rot = g.random_element(rng)
        mu2 = g.Ad_star(np.linalg.inv(rot)) @ mu1
        w = coadjoint_transport(g, mu1, mu2)
        assert np.linalg.norm(g.Ad_star(np.linalg.inv(w)) @ mu1 - mu2) <= 1e-10


class TestLeafStructure:
    def test_so3_sphere_leaf(self):
        b = so3_bundle()
        orb = coadjoint_orbit(b.group, np.array([0.0, 0.0, 1.0]), seed=17)
        rep = leaf_structure(b, orb, samples=15, seed=18)
        assert rep.passed, rep.failures()
        assert rep.extras["leaf_dim"] == 6  # 2 * dim(P/G) + dim O = 4 + 2

    def test_zero_orbit_leaf_is_reduced_cotangent(self):
        b = so3_bundle()
        orb = coadjoint_orbit(b.group, np.zeros(3), seed=19)
        rep = leaf_structure(b, orb, samples=10, seed=20)
        assert rep.passed, rep.failures()
        assert rep.extras["leaf_dim"] == 2 * b.d

    def test_abelian_affine_leaf(self):
        b = u1_bundle()
        orb = coadjoint_orbit(b.group, np.array([0.8]), seed=21)
        rep = leaf_structure(b, orb, samples=10, seed=22)
        assert rep.passed, rep.failures()
        assert rep.extras["orbit_dim"] == 0

    def test_sigma_independence_of_connection(self):
        # leaf membership and dimension do not depend on the chosen connection
        orb_seed, mu0 = 23, np.array([0.0, 0.0, 1.0])
        b1 = so3_bundle()
        b2 = so3_bundle(conn_matrix=np.array([[0.0, 0.5], [-0.3, 0.1], [0.2, 0.0]]))
        o1 = coadjoint_orbit(b1.group, mu0, seed=orb_seed)
        r1 = leaf_structure(b1, o1, samples=10, seed=24)
        r2 = leaf_structure(b2, o1, samples=10, seed=24)
        assert r1.passed and r2.passed
        assert r1.extras["leaf_dim"] == r2.extras["leaf_dim"]


class TestMagneticTerm:
    def test_u1_curvature_frozen_value(self):
        two_form, rep = magnetic_term(u1_bundle(), np.array([1.0]), samples=8, seed=25)
        assert rep.passed, rep.failures()
        m, rho = np.array([0.3, -0.2]), np.array([0.1, 0.7])
        ex, ey = np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0])
        # oracle: d((-y dx + x dy)/2) = dx ^ dy
        assert abs(two_form(m, rho, ex, ey) - 1.0) <= 1e-7

    def test_flat_connection_vanishes(self):
        t1 = liealg.torus(1)
        b = BundleSpec("TrivialProduct", t1, ConnectionData.flat(2, 1), base_box=[[-1.0, 1.0], [-1.0, 1.0]])
        two_form, rep = magnetic_term(b, np.array([1.0]), samples=6, seed=26)
        assert rep.passed
        rng = np.random.default_rng(27)
        m, rho = b.random_base(rng), rng.standard_normal(2)
        assert abs(two_form(m, rho, rng.standard_normal(4), rng.standard_normal(4))) <= 1e-9

    def test_zero_character_vanishes(self):
        two_form, rep = magnetic_term(u1_bundle(), np.array([0.0]), samples=6, seed=28)
        rng = np.random.default_rng(29)
        m = np.array([0.2, 0.1])
        assert abs(two_form(m, rng.standard_normal(2), rng.standard_normal(4), rng.standard_normal(4))) <= 1e-9

    def test_rejects_non_character(self):
        with pytest.raises(ValueError):
            magnetic_term(so3_bundle(), np.array([0.0, 0.0, 1.0]))


class TestGroupoidAction:
    def test_suite(self):
        b = so3_bundle()
        orb = coadjoint_orbit(b.group, np.array([0.0, 0.0, 1.0]), seed=30)
        rep = groupoid_action_suite(b, orb, samples=6, seed=31)
        assert rep.passed, rep.failures()

    def test_identity_arrow_acts_trivially(self):
        b = so3_bundle()
        rng = np.random.default_rng(32)
        beta = rng.standard_normal(3)
        m2 = b.random_base(rng)
        a2 = rng.standard_normal(2)
        # the identity arrow at the class (m2, -a2, beta)
        lam = poisson.PairClassPoint(m2, np.eye(3), m2, -a2, beta, a2, -beta)
        y = poisson.PairClassPoint(m2, np.eye(3), b.random_base(rng), -a2, beta, rng.standard_normal(2), rng.standard_normal(3))
        z = poisson._pair_product(b, lam, y)
        assert np.linalg.norm(poisson._pair_t(b, z) - poisson._pair_t(b, lam)) <= 1e-12
        assert np.linalg.norm(poisson._pair_s(b, z) - poisson._pair_s(b, y)) <= 1e-12

import numpy as np
import pytest

from gaugemech import liealg
from gaugemech.liealg import (
    LieDomainError,
    TangentGroupPoint,
    tangent_group_identity,
    tangent_group_inverse,
    tangent_group_product,
    validate_spec,
)


def rodrigues(w):
    """Independent closed-form oracle for the SO(3) exponential."""
    theta = np.linalg.norm(w)
    k = np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0.0]])
    if theta < 1e-12:
        return np.eye(3) + k
    return np.eye(3) + np.sin(theta) / theta * k + (1 - np.cos(theta)) / theta**2 * (k @ k)


@pytest.fixture(scope="module")
def so3():
    return liealg.so3()


class TestBracket:
    def test_antisymmetry_on_self(self, so3):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = so3.random_algebra(rng)
            assert np.allclose(so3.bracket(x, x), 0.0)

    def test_so3_basis_bracket(self, so3):
        e = np.eye(3)
        # oracle: matrix commutator of the chosen basis matrices, re-expanded
        comm = so3.basis[0] @ so3.basis[1] - so3.basis[1] @ so3.basis[0]
        expected = so3.to_coords(comm)
        np.testing.assert_allclose(so3.bracket(e[0], e[1]), expected, atol=1e-14)
        np.testing.assert_allclose(expected, [0.0, 0.0, 1.0], atol=1e-14)

    def test_abelian_brackets_vanish(self):
        r3 = liealg.translation_group(3)
        rng = np.random.default_rng(7)
        assert np.allclose(r3.bracket(r3.random_algebra(rng), r3.random_algebra(rng)), 0.0)

    def test_dimension_mismatch(self, so3):
        with pytest.raises(ValueError):
            so3.bracket(np.zeros(2), np.zeros(3))


class TestExpLog:
    def test_exp_zero(self, so3):
        np.testing.assert_allclose(so3.exp(np.zeros(3)), np.eye(3), atol=1e-15)

    def test_exp_quarter_turn_matches_rodrigues(self, so3):
        w = np.array([0.0, 0.0, np.pi / 2])
        np.testing.assert_allclose(so3.exp(w), rodrigues(w), atol=1e-13)
        np.testing.assert_allclose(so3.exp(w), [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-13)

    def test_exp_random_matches_rodrigues(self, so3):
        rng = np.random.default_rng(3)
        for _ in range(15):
            w = rng.standard_normal(3)
            np.testing.assert_allclose(so3.exp(w), rodrigues(w), atol=1e-12)

    def test_log_roundtrip(self, so3):
        x = np.array([0.1, 0.0, 0.0])
        np.testing.assert_allclose(so3.log(so3.exp(x)), x, atol=1e-12)
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = 0.8 * rng.standard_normal(3)
            np.testing.assert_allclose(so3.exp(so3.log(so3.exp(x))), so3.exp(x), atol=1e-10)

    def test_log_outside_injectivity_radius(self, so3):
        with pytest.raises(LieDomainError):
            so3.log(so3.exp(np.array([np.pi, 0.0, 0.0])))

    def test_heisenberg_nilpotent_roundtrip(self):
        h3 = liealg.heisenberg3()
        rng = np.random.default_rng(5)
        x = 2.0 * rng.standard_normal(3)
        np.testing.assert_allclose(h3.log(h3.exp(x)), x, atol=1e-11)

    def test_torus_angle_wrap(self):
        t1 = liealg.torus(1)
        np.testing.assert_allclose(t1.exp(np.array([1.0])), t1.exp(np.array([1.0 + 2 * np.pi])), atol=1e-12)


class TestAdjoint:
    def test_identity_element(self, so3):
        rng = np.random.default_rng(6)
        x, mu = so3.random_algebra(rng), so3.random_coalgebra(rng)
        np.testing.assert_allclose(so3.Ad(np.eye(3)) @ x, x, atol=1e-13)
        np.testing.assert_allclose(so3.Ad_star(np.eye(3)) @ mu, mu, atol=1e-13)

    def test_Ad_homomorphism(self, so3):
        # oracle: matrix conjugation, composed two ways
        rng = np.random.default_rng(8)
        for _ in range(10):
            g, h = so3.random_element(rng), so3.random_element(rng)
            np.testing.assert_allclose(so3.Ad(g @ h), so3.Ad(g) @ so3.Ad(h), atol=1e-12)

    def test_Ad_star_pairing_duality(self, so3):
        rng = np.random.default_rng(9)
        for _ in range(10):
            g = so3.random_element(rng)
            mu, x = so3.random_coalgebra(rng), so3.random_algebra(rng)
            lhs = so3.pair(so3.Ad_star(g) @ mu, x)
            rhs = so3.pair(mu, so3.Ad(g) @ x)
            assert abs(lhs - rhs) <= 1e-13

    def test_ad_star_pairing(self, so3):
        rng = np.random.default_rng(10)
        x, y, mu = so3.random_algebra(rng), so3.random_algebra(rng), so3.random_coalgebra(rng)
        assert abs(so3.pair(so3.ad_star(x) @ mu, y) - so3.pair(mu, so3.bracket(x, y))) <= 1e-13

    def test_abelian_coadjoint_trivial(self):
        r2 = liealg.translation_group(2)
        rng = np.random.default_rng(12)
        mu = r2.random_coalgebra(rng)
        np.testing.assert_allclose(r2.Ad_star(r2.random_element(rng)) @ mu, mu, atol=1e-13)


class TestTangentGroup:
    def test_zero_sections_multiply(self, so3):
        rng = np.random.default_rng(13)
        g, h = so3.random_element(rng), so3.random_element(rng)
        prod = tangent_group_product(so3, TangentGroupPoint(g, np.zeros(3)), TangentGroupPoint(h, np.zeros(3)))
        np.testing.assert_allclose(prod.base, g @ h, atol=1e-13)
        np.testing.assert_allclose(prod.left, 0.0, atol=1e-13)

    def test_identity_fiber_adds(self, so3):
        rng = np.random.default_rng(14)
        x, y = so3.random_algebra(rng), so3.random_algebra(rng)
        prod = tangent_group_product(so3, TangentGroupPoint(np.eye(3), x), TangentGroupPoint(np.eye(3), y))
        np.testing.assert_allclose(prod.base, np.eye(3), atol=1e-13)
        np.testing.assert_allclose(prod.left, x + y, atol=1e-13)

    def test_product_matches_curve_derivative(self, so3):
        # oracle: finite difference of t -> (g exp(t xi))(h exp(t eta)) in the embedding
        rng = np.random.default_rng(15)
        h_fd = 1e-5
        for _ in range(10):
            g, h = so3.random_element(rng), so3.random_element(rng)
            xi, eta = so3.random_algebra(rng), so3.random_algebra(rng)
            prod = tangent_group_product(so3, TangentGroupPoint(g, xi), TangentGroupPoint(h, eta))
            plus = (g @ so3.exp(h_fd * xi)) @ (h @ so3.exp(h_fd * eta))
            minus = (g @ so3.exp(-h_fd * xi)) @ (h @ so3.exp(-h_fd * eta))
            fd = (plus - minus) / (2 * h_fd)
            emb = liealg.tangent_embed(so3, prod)
            assert np.max(np.abs(fd - emb)) <= 1e-10

    def test_associativity_and_inverse(self, so3):
        rng = np.random.default_rng(16)
        for _ in range(10):
            pts = [TangentGroupPoint(so3.random_element(rng), so3.random_algebra(rng)) for _ in range(3)]
            p1 = tangent_group_product(so3, tangent_group_product(so3, pts[0], pts[1]), pts[2])
            p2 = tangent_group_product(so3, pts[0], tangent_group_product(so3, pts[1], pts[2]))
            assert np.max(np.abs(p1.base - p2.base)) <= 1e-10
            assert np.max(np.abs(p1.left - p2.left)) <= 1e-10
            inv = tangent_group_inverse(so3, pts[0])
            unit = tangent_group_product(so3, pts[0], inv)
            ident = tangent_group_identity(so3)
            assert np.max(np.abs(unit.base - ident.base)) <= 1e-12
            assert np.max(np.abs(unit.left)) <= 1e-12


class TestValidate:
    @pytest.mark.parametrize("factory", [liealg.so3, liealg.heisenberg3, lambda: liealg.translation_group(3), lambda: liealg.torus(2)])
    def test_builtins_pass(self, factory):
        assert validate_spec(factory()).passed

    def test_broken_antisymmetry_fails_named_check(self, so3):
        bad = np.array(so3.structure)
        bad[0, 1, 2] = 2.0  # c^3_12 != -c^3_21
        spec = liealg.LieGroupSpec("broken", 3, 3, so3.basis, bad, so3.membership_residual)
        rep = validate_spec(spec)
        assert not rep.passed
        assert any(c.name == "antisymmetry" for c in rep.failures())

    def test_jacobi_defect_zero_for_so3(self, so3):
        assert liealg.jacobi_defect(so3) <= 1e-12


class TestSerialization:
    def test_json_roundtrip(self, tmp_path, so3):
        path = tmp_path / "so3.json"
        liealg.save_spec(so3, str(path))
        back = liealg.load_spec(str(path))
        np.testing.assert_allclose(back.basis, so3.basis)
        np.testing.assert_allclose(back.structure, so3.structure)
        assert back.membership_residual is not None
        assert validate_spec(back).passed

    def test_generic_membership_fallback(self, so3):
        doc = liealg.spec_to_json(so3)
        doc["name"] = "custom-rotations"
        spec = liealg.spec_from_json(doc)
        rng = np.random.default_rng(18)
        assert spec.contains(spec.random_element(rng))
        assert not spec.contains(np.diag([2.0, 1.0, 1.0]))

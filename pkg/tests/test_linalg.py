import numpy as np
import pytest

from geomech.errors import DimensionError
from geomech.linalg import AntisymMatrix, axial_to_matrix, cross, nullspace, pfaffian


class TestCross:
    def test_basis_orientation(self):
        assert np.array_equal(cross([1, 0, 0], [0, 1, 0]), [0, 0, 1])

    def test_antisymmetry(self):
        assert np.array_equal(cross([0, 1, 0], [1, 0, 0]), [0, 0, -1])

    def test_self_product(self):
        assert np.array_equal(cross([2, -3, 5], [2, -3, 5]), [0, 0, 0])

    def test_bilinear_antisym_jacobi(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b, c = rng.normal(size=(3, 3))
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            c /= np.linalg.norm(c)
            assert np.allclose(cross(a + 2 * b, c), cross(a, c) + 2 * cross(b, c),
                               atol=1e-14)
            assert np.allclose(cross(a, b), -cross(b, a), atol=1e-15)
            jac = cross(a, cross(b, c)) + cross(b, cross(c, a)) + cross(c, cross(a, b))
            assert np.max(np.abs(jac)) <= 1e-14


class TestAntisymMatrix:
    def test_structural_antisymmetry(self):
        m = AntisymMatrix(3, {(0, 1): 2.5, (1, 2): -1.0})
        assert m[1, 0] == -m[0, 1] == -2.5
        assert m[2, 1] == 1.0
        assert all(m[i, i] == 0.0 for i in range(3))

    def test_lower_triangle_rejected(self):
        with pytest.raises(DimensionError):
            AntisymMatrix(3, {(1, 0): 1.0})
        with pytest.raises(DimensionError):
            AntisymMatrix(3, {(1, 1): 1.0})

    def test_unsupported_dim(self):
        with pytest.raises(DimensionError):
            AntisymMatrix(9)

    def test_from_dense_validates(self):
        with pytest.raises(ValueError):
            AntisymMatrix.from_dense(np.eye(3))

    def test_immutable(self):
        m = AntisymMatrix(3, {(0, 1): 1.0})
        with pytest.raises(ValueError):
            m.array[0, 1] = 5.0


class TestAxial:
    def test_unit_z(self):
        m = axial_to_matrix([0, 0, 1])
        assert np.array_equal(m @ [1, 0, 0], [0, 1, 0])

    def test_zero(self):
        assert np.all(axial_to_matrix([0, 0, 0]).array == 0.0)

    def test_matches_cross(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            v, w = rng.normal(size=(2, 3))
            assert np.allclose(axial_to_matrix(v) @ w, cross(v, w), atol=1e-15)


class TestPfaffian:
    def test_dim2(self):
        assert pfaffian(AntisymMatrix(2, {(0, 1): 3.5})) == 3.5

    def test_block_diagonal(self):
        m = AntisymMatrix(6, {(0, 1): 2.0, (2, 3): -3.0, (4, 5): 5.0})
        assert pfaffian(m) == 2.0 * (-3.0) * 5.0

    def test_odd_dimension_rejected(self):
        with pytest.raises(DimensionError):
            pfaffian(AntisymMatrix(3))

    @pytest.mark.parametrize("dim", [2, 4, 6])
    def test_square_is_determinant(self, dim):
        # determinant oracle, 1000 random matrices per the contract
        rng = np.random.default_rng(dim)
        for _ in range(1000):
            a = rng.uniform(-1, 1, size=(dim, dim))
            a = a - a.T
            det = np.linalg.det(a)
            assert abs(pfaffian(a) ** 2 - det) <= 1e-12 * max(1.0, abs(det))


class TestNullspace:
    def test_zero_matrix_full_kernel(self):
        basis = nullspace(AntisymMatrix(3), tol=1e-10)
        assert len(basis) == 3

    def test_axial_kernel_is_axis(self):
        basis = nullspace(axial_to_matrix([0, 0, 1]), tol=1e-10)
        assert len(basis) == 1
        assert abs(abs(basis[0][2]) - 1.0) < 1e-14

    def test_tol_positive(self):
        with pytest.raises(ValueError):
            nullspace(AntisymMatrix(3), tol=0.0)

    def test_orthonormal_and_small_image(self):
        rng = np.random.default_rng(7)
        tol = 1e-10
        for dim in (3, 5, 7):
            for _ in range(50):
                a = rng.normal(size=(dim, dim))
                a = a - a.T
                basis = nullspace(a, tol)
                # odd-dimensional antisymmetric matrices are always singular
                assert len(basis) >= 1
                scale = np.linalg.norm(a, 2)
                for i, v in enumerate(basis):
                    assert abs(np.linalg.norm(v) - 1.0) <= 1e-12
                    assert np.linalg.norm(a @ v) <= 10 * tol * scale
                    for w in basis[i + 1:]:
                        assert abs(v @ w) <= 1e-12

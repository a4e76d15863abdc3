import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwlab import kernel
from dwlab.errors import DefinitenessError, MatrixRangeError, SingularMatrixError


class TestHermitianGeig:
    def test_identity_pencil(self):
        w, _ = kernel.hermitian_geig(np.eye(2), np.eye(2))
        np.testing.assert_allclose(w, [1.0, 1.0])

    def test_diagonal_ratio(self):
        w, _ = kernel.hermitian_geig(np.diag([1.0, 4.0]), np.diag([1.0, 2.0]))
        np.testing.assert_allclose(w, [1.0, 2.0])

    def test_2x2_hand_solved(self):
        # char. polynomial of [[2,1],[1,2]] is (l-2)^2 - 1 -> l = 1, 3
        w, _ = kernel.hermitian_geig(np.array([[2.0, 1.0], [1.0, 2.0]]), np.eye(2))
        np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-12)

    def test_eigenvalues_ascending_and_rhs_orthonormal(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 9))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            a = (a + a.conj().T) / 2
            b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            b = b @ b.conj().T + n * np.eye(n)
            w, v = kernel.hermitian_geig(a, b)
            assert np.all(np.diff(w) >= -1e-12)
            gram = v.conj().T @ b @ v
            assert np.abs(gram - np.eye(n)).max() <= 1e-10
            resid = a @ v - b @ v @ np.diag(w)
            assert np.abs(resid).max() <= 1e-9 * max(np.abs(a).max(), 1.0)

    def test_indefinite_rhs_reports_pivot(self):
        rhs = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(DefinitenessError) as err:
            kernel.hermitian_geig(np.eye(3), rhs)
        assert err.value.pivot == 3

    def test_non_hermitian_lhs_rejected(self):
        with pytest.raises(DefinitenessError):
            kernel.hermitian_geig(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))


class TestMatrixExponential:
    def test_zero_matrix(self):
        np.testing.assert_allclose(
            kernel.matrix_exponential(np.zeros((3, 3)), 5.0), np.eye(3)
        )

    def test_scalar_decay(self):
        out = kernel.matrix_exponential(np.diag([-1.0]), 1.0)
        np.testing.assert_allclose(out, [[np.exp(-1.0)]], rtol=1e-13)

    def test_quarter_turn_rotation(self):
        gen = np.array([[0.0, 1.0], [-1.0, 0.0]])
        out = kernel.matrix_exponential(gen, np.pi / 2)
        np.testing.assert_allclose(out, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_exponential_inverse_property(self, seed):
        gen = np.random.default_rng(seed)
        m = gen.standard_normal((8, 8)) + 1j * gen.standard_normal((8, 8))
        m *= 10.0 / max(np.linalg.norm(m, 2), 1e-12)
        prod = kernel.matrix_exponential(m, 1.0) @ kernel.matrix_exponential(m, -1.0)
        assert np.abs(prod - np.eye(8)).max() <= 1e-10

    def test_extreme_norm_range_error(self):
        with pytest.raises(MatrixRangeError):
            kernel.matrix_exponential(np.diag([1.0]), 1e9)

    def test_overflow_detected(self):
        with pytest.raises(MatrixRangeError):
            kernel.matrix_exponential(np.diag([2000.0]), 1.0)


class TestSolveLinear:
    def test_identity(self, rng):
        b = rng.standard_normal(4)
        np.testing.assert_allclose(kernel.solve_linear(np.eye(4), b), b)

    def test_diagonal(self):
        x = kernel.solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 8.0]))
        np.testing.assert_allclose(x, [1.0, 2.0])

    def test_back_substitution(self):
        x = kernel.solve_linear(np.array([[1.0, 1.0], [0.0, 1.0]]),
                                np.array([3.0, 1.0]))
        np.testing.assert_allclose(x, [2.0, 1.0])

    def test_residual_bound_on_random_well_conditioned_systems(self, rng):
        for _ in range(1000):
            n = int(rng.integers(2, 9))
            m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            m += 2 * n * np.eye(n)  # keep it comfortably nonsingular
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            x = kernel.solve_linear(m, b)
            cond = np.linalg.cond(m)
            resid = np.linalg.norm(m @ x - b)
            assert resid <= 1e-10 * np.linalg.norm(b) * cond

    def test_singular_matrix_reports_condition(self):
        with pytest.raises(SingularMatrixError) as err:
            kernel.solve_linear(np.array([[1.0, 1.0], [1.0, 1.0]]),
                                np.array([1.0, 1.0]))
        assert err.value.cond_estimate is None or err.value.cond_estimate > 1e12


class TestWeightedNorms:
    def test_plain_gram_reduces_to_spectral_norm(self, rng):
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        np.testing.assert_allclose(
            kernel.weighted_operator_norm(m, np.eye(5)), np.linalg.norm(m, 2),
            rtol=1e-12,
        )

    def test_weighted_norm_bounds_weighted_vectors(self, rng):
        n = 5
        g = rng.standard_normal((n, n))
        gram = g @ g.T + n * np.eye(n)
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        bound = kernel.weighted_operator_norm(m, gram)
        for _ in range(50):
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            assert kernel.gram_norm(m @ v, gram) <= (bound + 1e-10) * kernel.gram_norm(v, gram)

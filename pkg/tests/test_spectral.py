import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import solve_continuous_lyapunov

from robustpi import spectral
from robustpi.errors import DefinitenessError, DimensionError, NumericError, StabilityError

from conftest import random_hurwitz

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sorted_complex(z):
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((np.round(z.imag, 8), np.round(z.real, 8)))]


class TestEigvals:
    def test_diagonal(self):
        np.testing.assert_allclose(sorted(spectral.eigvals(np.diag([3.0, -1.0, 2.0])).real), [-1, 2, 3])

    def test_rotation_block_gives_conjugate_pair(self):
        z = spectral.eigvals([[0.0, -2.0], [2.0, 0.0]])
        np.testing.assert_allclose(sorted(z.imag), [-2.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(z.real, 0.0, atol=1e-12)

    def test_one_by_one(self):
        assert spectral.eigvals([[-4.5]])[0] == pytest.approx(-4.5)

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
    def test_matches_numpy(self, rng, n):
        for _ in range(20):
            a = rng.normal(size=(n, n))
            ours = sorted_complex(spectral.eigvals(a))
            ref = sorted_complex(np.linalg.eigvals(a))
            np.testing.assert_allclose(ours, ref, atol=1e-8 * (1 + np.abs(ref).max()))

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, (4, 4), elements=finite))
    def test_trace_and_determinant(self, a):
        z = spectral.eigvals(a)
        scale = 1 + np.abs(a).sum()
        assert np.sum(z).real == pytest.approx(np.trace(a), abs=1e-8 * scale)
        assert abs(np.sum(z).imag) < 1e-8 * scale
        assert np.prod(z).real == pytest.approx(np.linalg.det(a), rel=1e-6, abs=1e-6 * scale ** 4)

    def test_hessenberg_is_similar(self, rng):
        a = rng.normal(size=(6, 6))
        h = spectral.hessenberg(a)
        assert np.allclose(np.tril(h, -2), 0.0)
        assert np.trace(h) == pytest.approx(np.trace(a))
        np.testing.assert_allclose(np.linalg.norm(h), np.linalg.norm(a))

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionError):
            spectral.eigvals(np.ones((2, 3)))
        with pytest.raises(NumericError):
            spectral.eigvals([[np.nan, 0.0], [0.0, 1.0]])
        with pytest.raises(DimensionError):
            spectral.eigvals(np.zeros((0, 0)))


class TestHurwitz:
    def test_abscissa(self):
        assert spectral.spectral_abscissa(np.diag([-1.0, -3.0])) == pytest.approx(-1.0)

    def test_margin(self):
        a = np.diag([-0.5, -2.0])
        assert spectral.is_hurwitz(a)
        assert not spectral.is_hurwitz(a, margin=1.0)

    def test_marginal_is_not_hurwitz(self):
        assert not spectral.is_hurwitz([[0.0, 1.0], [-1.0, 0.0]])

    def test_real_parts_sorted(self, rng):
        parts = spectral.eig_real_parts(rng.normal(size=(5, 5)))
        assert parts == sorted(parts, reverse=True)


class TestNorms:
    def test_spectral_norm_oracle(self, rng):
        a = rng.normal(size=(4, 3))
        assert spectral.spectral_norm(a) == pytest.approx(np.linalg.norm(a, 2))

    def test_min_singular(self):
        assert spectral.min_singular_value(np.diag([3.0, 0.5])) == pytest.approx(0.5)

    def test_condition_number(self):
        assert spectral.condition_number(np.diag([2.0, 8.0])) == pytest.approx(4.0)

    def test_condition_number_indefinite(self):
        with pytest.raises(DefinitenessError):
            spectral.condition_number(np.diag([1.0, -1.0]))

    def test_positive_definite(self):
        assert spectral.is_positive_definite(np.eye(3))
        assert not spectral.is_positive_definite(np.diag([1.0, 0.0]))


class TestLyapunov:
    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_matches_scipy(self, rng, n):
        for _ in range(10):
            a = random_hurwitz(rng, n)
            q = spectral.solve_lyapunov(a, np.eye(n))
            ref = solve_continuous_lyapunov(a.T, -np.eye(n))
            np.testing.assert_allclose(q, ref, rtol=1e-8, atol=1e-10)

    def test_scalar_closed_form(self):
        # 2 a q + c = 0
        assert spectral.solve_lyapunov([[-2.0]], [[3.0]])[0, 0] == pytest.approx(0.75)

    def test_symmetric_output(self, rng):
        q = spectral.solve_lyapunov(random_hurwitz(rng, 5), np.eye(5))
        assert np.array_equal(q, q.T)

    def test_general_psd_rhs(self, rng):
        a = random_hurwitz(rng, 4)
        b = rng.normal(size=(4, 2))
        c = b @ b.T
        q = spectral.solve_lyapunov(a, c)
        assert spectral.lyapunov_residual(a, q, c) < 1e-10 * (1 + np.linalg.norm(c, 2))

    def test_non_hurwitz_raises(self):
        with pytest.raises(StabilityError):
            spectral.solve_lyapunov(np.eye(2), np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            spectral.solve_lyapunov(-np.eye(2), np.eye(3))

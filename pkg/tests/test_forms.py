import numpy as np
import pytest

from dwlab import (
    InnerProductPair,
    SesquilinearForm,
    accretivity_check,
    build_interpolation_scale,
    continuity_constant,
    ellipticity_constants,
    imag_bound_constant,
    mixed_continuity_constant,
    perturbed_ellipticity,
    re_equals_V_inner,
    young_shift,
)
from dwlab.forms import ellipticity_margin


def scalar_pair(gv=1.0, gh=1.0):
    return InnerProductPair(gram_v=np.array([[gv]]), gram_h=np.array([[gh]]))


class TestContinuityConstant:
    def test_scalar_ratio(self):
        pair = scalar_pair()
        assert continuity_constant(SesquilinearForm(np.array([[2.0]])), pair) == pytest.approx(2.0)

    def test_cauchy_schwarz_equality(self, random_pair):
        form = SesquilinearForm(random_pair.gram_v)
        assert continuity_constant(form, random_pair) == pytest.approx(1.0, abs=1e-12)

    def test_identity_form_against_anisotropic_gram(self):
        # brute-force oracle: maximize |v^H u| over V-unit spheres
        pair = InnerProductPair(gram_v=np.diag([1.0, 4.0]), gram_h=np.eye(2))
        form = SesquilinearForm(np.eye(2))
        rng = np.random.default_rng(5)
        best = 0.0
        for _ in range(20000):
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            best = max(best, abs(form(u, v)) / (pair.norm_v(u) * pair.norm_v(v)))
        computed = continuity_constant(form, pair)
        assert computed == pytest.approx(1.0, abs=1e-12)
        assert best <= computed + 1e-10

    def test_slot_swap_symmetry(self, rng, random_pair):
        s = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        direct = continuity_constant(SesquilinearForm(s), random_pair)
        swapped = continuity_constant(SesquilinearForm(s.conj().T), random_pair)
        assert direct == pytest.approx(swapped, rel=1e-12)

    def test_witness_attains_supremum(self, rng, random_pair):
        s = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        form = SesquilinearForm(s)
        constant, u, v = continuity_constant(form, random_pair, return_witness=True)
        ratio = abs(form(u, v)) / (random_pair.norm_v(u) * random_pair.norm_v(v))
        assert ratio == pytest.approx(constant, rel=1e-10)


class TestEllipticity:
    def test_v_inner_product_is_coercive(self, random_pair):
        cert = ellipticity_constants(SesquilinearForm(random_pair.gram_v), random_pair)
        assert cert is not None
        assert cert.omega == 0.0
        assert cert.alpha == pytest.approx(1.0, abs=1e-10)

    def test_additive_shift(self, random_pair):
        s = random_pair.gram_v - 3.0 * random_pair.gram_h
        cert = ellipticity_constants(SesquilinearForm(s), random_pair, [0.0, 3.0])
        assert cert is not None
        assert cert.omega == 3.0
        assert cert.alpha == pytest.approx(1.0, abs=1e-10)

    def test_zero_form_not_coercive(self, random_pair):
        s = SesquilinearForm(np.zeros((6, 6)))
        assert ellipticity_constants(s, random_pair, [0.0]) is None

    def test_margin_monotone_in_omega(self, rng, random_pair):
        s = SesquilinearForm(rng.standard_normal((6, 6))
                             + 1j * rng.standard_normal((6, 6)))
        margins = [ellipticity_margin(s, random_pair, w) for w in (0.0, 1.0, 2.0, 8.0)]
        assert all(b >= a - 1e-12 for a, b in zip(margins, margins[1:]))

    def test_grid_validation(self, random_pair):
        with pytest.raises(ValueError):
            ellipticity_constants(SesquilinearForm(np.eye(6)), random_pair, [])
        with pytest.raises(ValueError):
            ellipticity_constants(SesquilinearForm(np.eye(6)), random_pair, [1.0, 0.0])


class TestAccretivity:
    def test_identity_accretive(self, random_pair):
        assert accretivity_check(SesquilinearForm(np.eye(6)), random_pair)

    def test_negative_identity_not(self, random_pair):
        assert not accretivity_check(SesquilinearForm(-np.eye(6)), random_pair)

    def test_nilpotent_not_accretive(self):
        # Hermitian part of [[0,1],[0,0]] has eigenvalues +-1/2
        pair = InnerProductPair(gram_v=np.eye(2), gram_h=np.eye(2))
        assert not accretivity_check(SesquilinearForm(np.array([[0.0, 1.0], [0.0, 0.0]])), pair)

    def test_two_sided_accretivity_forces_zero_hermitian_part(self, rng, random_pair):
        k = rng.standard_normal((6, 6))
        s = 1j * (k + k.T)  # purely skew contribution to the quadratic form
        form = SesquilinearForm(s)
        assert accretivity_check(form, random_pair)
        assert accretivity_check(SesquilinearForm(-s), random_pair)
        assert np.abs(form.hermitian_part()).max() <= 1e-12 * max(np.abs(s).max(), 1.0)


class TestReEqualsVInner:
    def test_exact_match(self, random_pair):
        assert re_equals_V_inner(SesquilinearForm(random_pair.gram_v), random_pair)

    def test_imaginary_perturbation_keeps_diagonal_real_part(self, rng, random_pair):
        k = rng.standard_normal((6, 6))
        s = random_pair.gram_v + 1j * (k + k.T)
        assert re_equals_V_inner(SesquilinearForm(s), random_pair)

    def test_scaled_gram_fails(self, random_pair):
        assert not re_equals_V_inner(SesquilinearForm(2.0 * random_pair.gram_v), random_pair)


class TestImagBound:
    def test_real_symmetric_vanishes(self, rng, random_pair):
        s = rng.standard_normal((6, 6))
        assert imag_bound_constant(SesquilinearForm(s + s.T), random_pair) == 0.0

    def test_scalar_hand_value(self):
        pair = scalar_pair(gv=4.0, gh=1.0)
        val = imag_bound_constant(SesquilinearForm(np.array([[1j]])), pair)
        assert val == pytest.approx(0.5, rel=1e-9)

    def test_dominates_monte_carlo_samples(self, rng, random_pair):
        s = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        form = SesquilinearForm(s)
        val = imag_bound_constant(form, random_pair)
        k = form.skew_part()
        u = rng.standard_normal((100_000, 6)) + 1j * rng.standard_normal((100_000, 6))
        num = np.abs(np.einsum("ij,jk,ik->i", u.conj(), k, u).real)
        den = np.sqrt(
            np.einsum("ij,jk,ik->i", u.conj(), random_pair.gram_h, u).real
            * np.einsum("ij,jk,ik->i", u.conj(), random_pair.gram_v, u).real
        )
        assert val >= (num / den).max() - 1e-10

    def test_agrees_with_independent_denser_search(self, rng, random_pair):
        from dwlab.forms import _imag_pencil_value
        from dwlab.kernel import DEFAULT_TOL

        s = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        form = SesquilinearForm(s)
        val = imag_bound_constant(form, random_pair)
        # a raw grid only lower-bounds the supremum; the polished searches
        # from independent grids must agree
        two_k = 2.0 * form.skew_part()
        fine_grid = max(
            _imag_pencil_value(two_k, random_pair, sv, DEFAULT_TOL)
            for sv in np.logspace(-5, 4, 1500)
        )
        assert val >= fine_grid - 1e-10
        dense = imag_bound_constant(form, random_pair, grid_points=1024)
        assert val == pytest.approx(dense, abs=1e-9, rel=1e-9)


class TestYoungShift:
    def test_zero_strength(self):
        assert young_shift(0.0, 1.0, 0.5, 2.0) == 0.0

    def test_linear_case_hand_value(self):
        # sup of 2 rho - rho^2 is 1
        assert young_shift(1.0, 1.0, 0.0, 1.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha_exp", [0.0, 0.3, 0.7])
    def test_matches_brute_force_maximization(self, alpha_exp, rng):
        for _ in range(5):
            m = float(rng.uniform(0.1, 3.0))
            ma = float(rng.uniform(0.1, 3.0))
            eps = float(rng.uniform(0.05, 5.0))
            closed = young_shift(m, ma, alpha_exp, eps)
            rho = np.logspace(-8, 8, 200_001)
            brute = float((2 * m * ma * rho ** (1 + alpha_exp) - eps * rho**2).max())
            assert closed == pytest.approx(brute, rel=1e-6)

    def test_nonincreasing_in_eps(self):
        values = [young_shift(1.2, 0.8, 0.4, e) for e in (0.1, 0.5, 1.0, 4.0)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_certified_quadratic_bound_on_grid(self):
        m, ma, a, eps = 1.3, 0.7, 0.35, 0.8
        shift = young_shift(m, ma, a, eps)
        rho = np.logspace(-6, 6, 1000)
        slack = eps * rho**2 + shift - 2 * m * ma * rho ** (1 + a)
        assert slack.min() >= -1e-10

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            young_shift(1.0, 1.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            young_shift(1.0, 1.0, 1.0, 1.0)


class TestPerturbedEllipticity:
    def test_unperturbed_split(self, random_pair):
        from dwlab import EllipticityCertificate

        scale = build_interpolation_scale(random_pair, 0.0)
        cert = perturbed_ellipticity(EllipticityCertificate(2.0, 1.5), 0.0, 0.0, scale)
        assert cert.alpha == pytest.approx(1.0)
        assert cert.omega == pytest.approx(1.5)

    def test_scalar_closed_form(self, random_pair):
        from dwlab import EllipticityCertificate

        scale = build_interpolation_scale(random_pair, 0.0)
        cert = perturbed_ellipticity(EllipticityCertificate(2.0, 0.0), 1.0, 0.0, scale)
        assert cert.alpha == pytest.approx(1.0)
        assert cert.omega == pytest.approx(young_shift(1.0, 1.0, 0.0, 1.0))

    @pytest.mark.parametrize("alpha_exp", [0.0, 0.3, 0.7])
    def test_certificate_reverifies_on_assembled_sum(self, alpha_exp, rng, random_pair):
        skew = rng.standard_normal((6, 6))
        a0 = SesquilinearForm(random_pair.gram_v + 1j * (skew + skew.T))
        cert0 = ellipticity_constants(a0, random_pair, [0.0])
        assert cert0 is not None
        scale = build_interpolation_scale(random_pair, alpha_exp)
        s1 = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        s2 = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        m1 = mixed_continuity_constant(s1, random_pair.gram_v, scale.gram_alpha)
        m2 = mixed_continuity_constant(s2, scale.gram_alpha, random_pair.gram_v)
        cert = perturbed_ellipticity(cert0, m1, m2, scale)
        summed = SesquilinearForm(a0.matrix + s1 + s2)
        margin = ellipticity_margin(summed, random_pair, cert.omega)
        assert margin >= cert.alpha - 1e-10


class TestInterpolationScale:
    def test_zero_exponent_recovers_h_gram(self, random_pair):
        scale = build_interpolation_scale(random_pair, 0.0)
        np.testing.assert_allclose(scale.gram_alpha, random_pair.gram_h, atol=1e-10)

    def test_near_one_exponent_on_diagonal_pair(self):
        pair = InnerProductPair(gram_v=np.diag([2.0, 5.0, 9.0]), gram_h=np.eye(3))
        scale = build_interpolation_scale(pair, 0.999)
        np.testing.assert_allclose(
            np.diag(scale.gram_alpha).real,
            np.array([2.0, 5.0, 9.0]) ** 0.999,
            rtol=1e-9,
        )

    def test_interpolation_inequality_with_unit_constant(self, rng, random_pair):
        scale = build_interpolation_scale(random_pair, 0.5)
        worst = -np.inf
        for _ in range(1000):
            u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            lhs = scale.norm(u)
            rhs = random_pair.norm_v(u) ** 0.5 * random_pair.norm_h(u) ** 0.5
            worst = max(worst, lhs - rhs)
        assert worst <= 1e-12

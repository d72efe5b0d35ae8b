import numpy as np
import pytest

from dispersia import (
    DampedTerm,
    ExpPolyKernel,
    GAUSSIAN,
    analyze,
    check_passivity,
    check_strict_passivity,
    debye,
    decay_exponent,
    drude,
    laplace,
    lorentz,
    omega_form,
)
from dispersia.dispersion import PassivityError

from conftest import (
    random_class_k_kernel,
    random_passive_kernel,
    series_m0_sample,
    series_m2_sample,
)

ZERO = ExpPolyKernel.zero()


def negative_debye():
    return ExpPolyKernel((DampedTerm((-1.0,), (0.0,), -1.0, 0.0),))


class TestOmegaForm:
    def test_debye_rational(self):
        form = omega_form(debye())
        w = np.linspace(-5, 5, 41)
        assert np.allclose(form.real_part(w), w**2 / (1 + w**2), atol=1e-12)

    def test_drude_rational(self):
        form = omega_form(drude())
        w = np.linspace(-5, 5, 41)
        assert np.allclose(form.real_part(w), 1 / (1 + w**2), atol=1e-12)

    def test_zero_kernel(self):
        form = omega_form(ZERO)
        assert form.is_zero
        assert form.real_part(2.0) == 0.0

    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(10)
        for _ in range(8):
            kern = random_class_k_kernel(rng)
            form = omega_form(kern)
            for w in rng.uniform(-100, 100, 50):
                direct = 1j * w * laplace(kern, 1j * w)
                got = form(w)
                assert abs(got - direct) <= 1e-9 * (1 + abs(direct))

    def test_parity_by_coefficient_structure(self):
        # real kernels give an even real part and an odd imaginary part
        rng = np.random.default_rng(11)
        for _ in range(8):
            form = omega_form(random_class_k_kernel(rng))
            pr, qr, pi = (np.asarray(c) for c in (form.pr, form.qr, form.pi))
            scale = max(1.0, np.max(np.abs(pr)), np.max(np.abs(qr)))
            assert np.all(np.abs(pr[1::2]) <= 1e-9 * scale)
            assert np.all(np.abs(qr[1::2]) <= 1e-9 * scale)
            assert np.all(np.abs(pi[0::2]) <= 1e-9 * max(1.0, np.max(np.abs(pi))))

    def test_denominator_has_no_real_roots(self):
        rng = np.random.default_rng(12)
        for _ in range(8):
            form = omega_form(random_class_k_kernel(rng))
            roots = np.roots(np.asarray(form.qr)[::-1])
            assert np.all(np.abs(roots.imag) > 1e-8)

    def test_degree_bounds(self):
        rng = np.random.default_rng(13)
        for _ in range(8):
            form = omega_form(random_class_k_kernel(rng))
            assert len(form.pr) <= len(form.qr)
            assert len(form.pi) <= len(form.qi)


class TestPassivity:
    def test_debye_passive(self):
        assert check_passivity(debye(), ZERO).passive

    def test_lorentz_passive(self):
        assert check_passivity(lorentz(), ZERO).passive

    def test_negative_debye_not_passive(self):
        report = check_passivity(negative_debye(), ZERO)
        assert not report.passive
        assert report.witnesses
        w = report.witnesses[0]
        assert (1j * w * laplace(negative_debye(), 1j * w)).real < 0

    def test_equivalent_formulation(self):
        # Re(i w L nu(i w)) >= 0  iff  w Im L nu(i w) <= 0
        rng = np.random.default_rng(14)
        for kern in (debye(), lorentz(), drude(), random_passive_kernel(rng)):
            for w in rng.uniform(-20, 20, 30):
                val = laplace(kern, 1j * w)
                assert ((1j * w * val).real >= -1e-12) == (w * val.imag <= 1e-12)


class TestStrictPassivity:
    def test_debye_strict(self):
        assert check_strict_passivity(debye(), ZERO).strictly_passive

    def test_drude_strict(self):
        assert check_strict_passivity(drude(), ZERO).strictly_passive

    def test_zero_pair_not_strict(self):
        report = check_strict_passivity(ZERO, ZERO)
        assert report.passive
        assert not report.strictly_passive

    def test_implication_strict_implies_passive(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            report = check_strict_passivity(random_passive_kernel(rng), ZERO)
            if report.strictly_passive:
                assert report.passive


class TestDecayExponent:
    def test_debye_m0(self):
        report = decay_exponent(debye(), ZERO)
        assert report.m == 0
        assert report.sigma_E > 0

    def test_lorentz_m2(self):
        assert decay_exponent(lorentz(), ZERO).m == 2

    def test_drude_m2(self):
        assert decay_exponent(drude(), ZERO).m == 2

    def test_both_fields(self):
        report = decay_exponent(debye(), debye())
        assert report.m == 0
        assert report.sigma_E > 0 and report.sigma_H > 0

    def test_requires_strict_passivity(self):
        with pytest.raises(PassivityError):
            decay_exponent(ZERO, ZERO)

    def test_quantified_bound_holds(self):
        # |w|^m (Re(iwLnuE)|X|^2 + Re(iwLnuH)|Y|^2) >= sigma_E|X|^2 + sigma_H|Y|^2
        rng = np.random.default_rng(16)
        for nu_e, nu_h in ((debye(), ZERO), (lorentz(), ZERO), (drude(), debye())):
            report = decay_exponent(nu_e, nu_h)
            fe, fh = omega_form(nu_e), omega_form(nu_h)
            wgrid = np.geomspace(report.omega0, 1e4, 200)
            re_e = fe.real_part(wgrid)
            re_h = fh.real_part(wgrid) if not nu_h.is_zero else np.zeros_like(wgrid)
            for _ in range(5):
                x2, y2 = rng.uniform(0, 1, 2)
                lhs = np.abs(wgrid) ** report.m * (re_e * x2 + re_h * y2)
                rhs = report.sigma_E * x2 + report.sigma_H * y2
                assert np.all(lhs >= rhs * (1 - 1e-6))


class TestExponentialSeriesFamily:
    def test_positive_sum_branch_gives_m0(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            assert analyze(series_m0_sample(rng), ZERO).m == 0

    def test_zero_sum_branch_gives_m2(self):
        rng = np.random.default_rng(18)
        for _ in range(10):
            report = analyze(series_m2_sample(rng), ZERO)
            assert report.m == 2
            assert report.sigma_E > 0


class TestSampledPath:
    def test_gaussian_analyze(self):
        report = analyze(GAUSSIAN, ZERO)
        assert report.passive and report.strictly_passive
        assert report.m == 0
        assert not report.certified

    def test_gaussian_real_part_positive(self):
        for w in np.geomspace(0.01, 100, 60):
            assert (1j * w * laplace(GAUSSIAN, 1j * w)).real > 0

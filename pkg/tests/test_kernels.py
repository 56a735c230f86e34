import numpy as np
import pytest

from hawkes_risk import (ExponentialClaims, ExponentialKernel, GammaClaims,
                         InvalidParameter, MomentsOnlyClaims, NotSamplable,
                         TabulatedKernel, ZeroKernel, claim_moments, l1_norm,
                         stability_check)


def tabulated_from(kernel, t_max, step):
    grid = np.arange(0.0, t_max + step / 2, step)
    return TabulatedKernel(grid, kernel(grid))


class TestL1Norm:
    def test_zero(self):
        assert l1_norm(ZeroKernel()) == 0.0

    def test_exponential_exact(self):
        assert l1_norm(ExponentialKernel(0.3, 0.5)) == pytest.approx(0.6, abs=0)

    def test_tabulated_matches_closed_form(self):
        k = tabulated_from(ExponentialKernel(0.3, 0.5), 40.0, 1e-3)
        assert l1_norm(k) == pytest.approx(0.6, abs=1e-4)

    def test_tabulated_convergence_order(self):
        exact = 0.6
        steps = [0.2, 0.1, 0.05]
        errs = [abs(l1_norm(tabulated_from(ExponentialKernel(0.3, 0.5), 40.0, s)) - exact)
                for s in steps]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 2.0 - 0.1)

    def test_non_finite_table_rejected(self):
        from hawkes_risk import IntegralDivergence

        with pytest.raises(IntegralDivergence):
            TabulatedKernel(np.array([0.0, 1.0]), np.array([1.0, np.inf]))


class TestStability:
    def test_subcritical_exponential(self):
        report = stability_check(ExponentialKernel(0.3, 0.5))
        assert report.stable
        assert report.closed_forms_valid

    def test_boundary_is_unstable(self):
        report = stability_check(ExponentialKernel(0.5, 0.5))
        assert not report.stable
        assert report.norm == pytest.approx(1.0)
        assert "unstable" in str(report)

    def test_zero_kernel_stable(self):
        assert stability_check(ZeroKernel()).stable

    def test_tabulated_monotone_check(self):
        k = tabulated_from(ExponentialKernel(0.3, 0.5), 10.0, 0.01)
        assert k.is_decreasing()
        bumpy = TabulatedKernel(np.array([0.0, 1.0, 2.0]), np.array([0.1, 0.3, 0.0]))
        assert not bumpy.is_decreasing()


class TestClaimMoments:
    def test_standard_exponential(self):
        assert claim_moments(ExponentialClaims(1.0)) == (1.0, 2.0)

    def test_gamma_reduces_to_exponential(self):
        # Gamma(1, b) is Exponential(b)
        assert claim_moments(GammaClaims(1.0, 0.5)) == pytest.approx((2.0, 8.0))

    def test_moments_only_passthrough(self):
        assert claim_moments(MomentsOnlyClaims(1.0, 2.0)) == (1.0, 2.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_jensen_holds_for_random_parameters(self, seed):
        rng = np.random.default_rng(seed)
        for claims in (ExponentialClaims(rng.uniform(0.1, 5.0)),
                       GammaClaims(rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0))):
            m1, m2 = claim_moments(claims)
            assert m1 > 0
            assert m2 >= m1**2

    def test_jensen_violation_rejected(self):
        with pytest.raises(InvalidParameter):
            MomentsOnlyClaims(2.0, 3.0)

    def test_moments_only_not_samplable(self):
        with pytest.raises(NotSamplable):
            MomentsOnlyClaims(1.0, 2.0).sample(np.random.default_rng(0), 5)

    def test_sampled_moments_match(self):
        rng = np.random.default_rng(42)
        y = GammaClaims(2.0, 0.5).sample(rng, 200000)
        m1, m2 = claim_moments(GammaClaims(2.0, 0.5))
        assert np.mean(y) == pytest.approx(m1, rel=0.02)
        assert np.mean(y**2) == pytest.approx(m2, rel=0.05)

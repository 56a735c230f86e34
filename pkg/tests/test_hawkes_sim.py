import numpy as np
import pytest
from scipy import stats

from hawkes_risk import (ExponentialClaims, ExponentialKernel, GridMismatch,
                         InsufficientSamples, MomentsOnlyClaims, NotSamplable,
                         PathBudgetExceeded, RiskPathConfig, TimeGrid, UnstableKernel,
                         ZeroKernel, empirical_cov, mean_N1, simulate_compound,
                         simulate_hawkes, simulate_risk_path, solve_g1, var_N1)

from oracles import moment_ode


class TestSimulateHawkes:
    def test_poisson_count_moments(self):
        counts = np.array([len(simulate_hawkes(ZeroKernel(), 3.0, 2.0, seed=1, path_index=i))
                           for i in range(20000)])
        se_mean = counts.std(ddof=1) / np.sqrt(counts.size)
        assert abs(counts.mean() - 6.0) < 3 * se_mean
        # variance of the sample variance of Poisson(6): ~ (2 var^2 + ...) / n
        se_var = np.sqrt((np.mean((counts - counts.mean()) ** 4)
                          - counts.var(ddof=1) ** 2) / counts.size)
        assert abs(counts.var(ddof=1) - 6.0) < 3 * se_var

    def test_exponential_kernel_count_moments(self, fig1_kernel, fig1_params):
        counts = np.array([len(simulate_hawkes(fig1_kernel, 1.0, 1.0, seed=2, path_index=i))
                           for i in range(30000)])
        mean_want = float(mean_N1(fig1_params, 1.0))
        var_want = float(var_N1(fig1_params, 1.0))
        se_mean = counts.std(ddof=1) / np.sqrt(counts.size)
        assert abs(counts.mean() - mean_want) < 3 * se_mean
        se_var = np.sqrt((np.mean((counts - counts.mean()) ** 4)
                          - counts.var(ddof=1) ** 2) / counts.size)
        assert abs(counts.var(ddof=1) - var_want) < 3 * se_var

    def test_bit_identical_reruns(self, fig1_kernel):
        a = simulate_hawkes(fig1_kernel, 5.0, 2.0, seed=9, path_index=17)
        b = simulate_hawkes(fig1_kernel, 5.0, 2.0, seed=9, path_index=17)
        assert np.array_equal(a.event_times, b.event_times)
        c = simulate_hawkes(fig1_kernel, 5.0, 2.0, seed=9, path_index=18)
        assert not np.array_equal(a.event_times, c.event_times)

    def test_events_inside_horizon_strictly_increasing(self, fig1_kernel):
        for i in range(50):
            path = simulate_hawkes(fig1_kernel, 4.0, 1.5, seed=3, path_index=i)
            if len(path):
                assert path.event_times[0] > 0
                assert path.event_times[-1] <= 1.5
                assert np.all(np.diff(path.event_times) > 0)

    def test_intensity_at_least_baseline(self, fig1_kernel):
        path = simulate_hawkes(fig1_kernel, 5.0, 2.0, seed=4, path_index=0)
        lam = path.intensity_at(fig1_kernel, np.linspace(0.01, 2.0, 64))
        assert np.all(lam >= 5.0)

    def test_generic_thinning_matches_markov_fast_path(self, fig1_kernel):
        # two-sample KS on terminal counts, 10^4 paths each
        fast = np.array([len(simulate_hawkes(fig1_kernel, 1.0, 1.0, seed=5, path_index=i))
                         for i in range(10000)])
        generic = np.array([len(simulate_hawkes(fig1_kernel, 1.0, 1.0, seed=6, path_index=i,
                                                method="thinning"))
                            for i in range(10000)])
        assert stats.ks_2samp(fast, generic).pvalue > 0.01

    def test_budget_guard(self):
        near_critical = ExponentialKernel(0.999, 1.0)
        with pytest.raises(PathBudgetExceeded):
            simulate_hawkes(near_critical, 1000.0, 20.0, seed=0, max_events=10000)

    def test_unstable_kernel_rejected(self):
        with pytest.raises(UnstableKernel):
            simulate_hawkes(ExponentialKernel(1.2, 1.0), 1.0, 1.0, seed=0)


class TestSimulateCompound:
    def test_no_events_means_zero_aggregate(self):
        # baseline small enough that most paths are empty
        path = simulate_compound(ZeroKernel(), 1e-9, 1.0, ExponentialClaims(1.0), seed=1)
        assert len(path.events) == 0
        assert path.aggregate_at([0.5, 1.0]) == pytest.approx([0.0, 0.0])

    def test_compound_poisson_mean(self):
        totals = np.array([simulate_compound(ZeroKernel(), 5.0, 1.0, ExponentialClaims(1.0),
                                             seed=7, path_index=i).aggregate_at([1.0])[0]
                           for i in range(20000)])
        se = totals.std(ddof=1) / np.sqrt(totals.size)
        assert abs(totals.mean() - 5.0) < 3 * se

    def test_compound_hawkes_mean(self, fig1_kernel, fig1_params):
        totals = np.array([simulate_compound(fig1_kernel, 1.0, 1.0, ExponentialClaims(1.0),
                                             seed=8, path_index=i).aggregate_at([1.0])[0]
                           for i in range(20000)])
        se = totals.std(ddof=1) / np.sqrt(totals.size)
        assert abs(totals.mean() - float(mean_N1(fig1_params, 1.0))) < 3 * se

    def test_moments_only_claims_rejected(self, fig1_kernel):
        with pytest.raises(NotSamplable):
            simulate_compound(fig1_kernel, 1.0, 1.0, MomentsOnlyClaims(1.0, 2.0), seed=0)

    def test_claims_independent_of_event_stream(self, fig1_kernel):
        # same path index, different kernels: identical claim draws per count
        a = simulate_compound(fig1_kernel, 1.0, 1.0, ExponentialClaims(1.0), seed=11, path_index=2)
        b = simulate_compound(ZeroKernel(), 1.0, 1.0, ExponentialClaims(1.0), seed=11, path_index=2)
        k = min(len(a.events), len(b.events))
        assert np.array_equal(a.claim_sizes[:k], b.claim_sizes[:k])


class TestSimulateRiskPath:
    def test_no_events_gives_pure_premium(self):
        grid = TimeGrid(1.0, 1e-2)
        cfg = RiskPathConfig(u=2.0, c=0.3, mu=1e-9, claims=ExponentialClaims(1.0),
                             kernel=ZeroKernel(), horizon=1.0)
        g1_cum = solve_g1(ZeroKernel(), grid).cumulative()
        wealth = simulate_risk_path(cfg, grid, seed=1)
        expected = 2.0 + 0.3 * grid.nodes + np.sqrt(1e-9) * 1.0 * g1_cum.values
        assert np.allclose(wealth.values, expected, atol=1e-12)

    def test_identity_against_compound_path(self, fig1_kernel):
        grid = TimeGrid(1.0, 1e-2)
        cfg = RiskPathConfig(u=2.0, c=0.3, mu=50.0, claims=ExponentialClaims(1.0),
                             kernel=fig1_kernel, horizon=1.0)
        g1_cum = solve_g1(fig1_kernel, grid).cumulative()
        wealth = simulate_risk_path(cfg, grid, seed=13, path_index=4, g1_cum=g1_cum)
        # same stream => same compound path
        comp = simulate_compound(fig1_kernel, 50.0, 1.0, ExponentialClaims(1.0),
                                 seed=13, path_index=4)
        rebuilt = (2.0 + 0.3 * grid.nodes + np.sqrt(50.0) * g1_cum.values
                   - comp.aggregate_at(grid.nodes) / np.sqrt(50.0))
        assert np.allclose(wealth.values, rebuilt, atol=1e-12)

    def test_centering_is_exact_in_expectation(self, fig1_kernel):
        # E[U_T - (u + cT)] = 0 at any mu because the premium is the compensator
        grid = TimeGrid(1.0, 0.05)
        cfg = RiskPathConfig(u=2.0, c=0.3, mu=400.0, claims=ExponentialClaims(1.0),
                             kernel=fig1_kernel, horizon=1.0)
        g1_cum = solve_g1(fig1_kernel, grid).cumulative()
        ends = np.array([simulate_risk_path(cfg, grid, seed=14, path_index=i,
                                            g1_cum=g1_cum).values[-1]
                         for i in range(4000)])
        se = ends.std(ddof=1) / np.sqrt(ends.size)
        assert abs(ends.mean() - (2.0 + 0.3)) < 3 * se

    def test_poisson_diffusion_variance(self):
        # Var(u + cT - U_T) = m2 T exactly for the scaled compound Poisson
        grid = TimeGrid(1.0, 0.05)
        cfg = RiskPathConfig(u=2.0, c=0.3, mu=400.0, claims=ExponentialClaims(1.0),
                             kernel=ZeroKernel(), horizon=1.0)
        g1_cum = solve_g1(ZeroKernel(), grid).cumulative()
        ends = np.array([simulate_risk_path(cfg, grid, seed=15, path_index=i,
                                            g1_cum=g1_cum).values[-1]
                         for i in range(4000)])
        dev = (2.0 + 0.3) - ends
        var = dev.var(ddof=1)
        se_var = np.sqrt((np.mean((dev - dev.mean()) ** 4) - var**2) / dev.size)
        assert abs(var - 2.0) < 3 * se_var

    def test_grid_horizon_mismatch_rejected(self, fig1_kernel):
        cfg = RiskPathConfig(u=2.0, c=0.3, mu=1.0, claims=ExponentialClaims(1.0),
                             kernel=fig1_kernel, horizon=1.0)
        with pytest.raises(GridMismatch):
            simulate_risk_path(cfg, TimeGrid(2.0, 1e-2), seed=0)


class TestEmpiricalCov:
    def test_identical_constant_paths_give_zero(self):
        from hawkes_risk import GridFunction

        grid = TimeGrid(1.0, 0.25)
        fns = [GridFunction(grid, np.full(grid.n_points, 3.0)) for _ in range(10)]
        model = empirical_cov(fns)
        assert np.allclose(model.matrix, 0.0)
        assert model.source == "mc-estimated"
        assert model.n_paths == 10

    def test_iid_normal_marginal_variance(self):
        grid = TimeGrid(1.0, 0.5)
        rng = np.random.default_rng(5)
        values = np.concatenate([np.zeros((100000, 1)), rng.standard_normal((100000, 2))],
                                axis=1)
        model = empirical_cov(values, grid)
        se = np.sqrt(2.0 / (100000 - 1))
        assert abs(model.matrix[0, 0] - 1.0) < 3 * se
        assert abs(model.matrix[1, 1] - 1.0) < 3 * se

    def test_single_path_rejected(self):
        from hawkes_risk import GridFunction

        grid = TimeGrid(1.0, 0.5)
        with pytest.raises(InsufficientSamples):
            empirical_cov([GridFunction(grid, np.zeros(grid.n_points))])

    def test_mismatched_grids_rejected(self):
        from hawkes_risk import GridFunction

        a = GridFunction(TimeGrid(1.0, 0.5), np.zeros(3))
        b = GridFunction(TimeGrid(1.0, 0.25), np.zeros(5))
        with pytest.raises(GridMismatch):
            empirical_cov([a, b])

    def test_scaled_hawkes_agrees_with_analytic(self, fig1_kernel, fig1_claims, fig1_params):
        from hawkes_risk import cov_G
        from hawkes_risk.hawkes_sim import simulate_scaled_centered

        grid = TimeGrid(1.0, 0.25)
        paths = simulate_scaled_centered(fig1_kernel, fig1_claims, 200.0, grid,
                                         4000, seed=21)
        model = empirical_cov(paths, grid)
        times = grid.nodes[1:]
        for i in range(len(times)):
            for j in range(i, len(times)):
                want = float(cov_G(fig1_params, fig1_claims, times[i], times[j]))
                vi = float(cov_G(fig1_params, fig1_claims, times[i], times[i]))
                vj = float(cov_G(fig1_params, fig1_claims, times[j], times[j]))
                se = np.sqrt((vi * vj + want**2) / (4000 - 1))
                assert abs(model.matrix[i, j] - want) < 4 * se


def test_excitation_state_moments(fig1_kernel):
    # Z at a fixed time against the generator ODE oracle, 20k paths
    ode = moment_ode(0.3, 0.5, [0.7])
    z = np.array([simulate_hawkes(fig1_kernel, 1.0, 1.0, seed=22, path_index=i)
                  .excitation_at(fig1_kernel, [0.7])[0]
                  for i in range(20000)])
    se1 = z.std(ddof=1) / np.sqrt(z.size)
    assert abs(z.mean() - float(ode["z1"][0])) < 3 * se1
    z2 = z**2
    se2 = z2.std(ddof=1) / np.sqrt(z2.size)
    assert abs(z2.mean() - float(ode["z2"][0])) < 3 * se2

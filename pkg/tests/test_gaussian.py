import numpy as np
import pytest

from hawkes_risk import (CovarianceModel, ExponentialClaims, ExponentialKernel,
                         InsufficientSamples, InvalidParameter, TabulatedKernel,
                         TimeGrid, ZeroKernel, build_covariance, fclt_check,
                         make_sampler, sample_G, var_G)
from hawkes_risk import analytic_exp as ax


@pytest.fixture
def brownian_model():
    return build_covariance(ZeroKernel(), ExponentialClaims(1.0), TimeGrid(1.0, 0.01))


class TestBuildCovariance:
    def test_zero_kernel_is_brownian(self, brownian_model):
        times = brownian_model.times
        want = 2.0 * np.minimum.outer(times, times)
        assert np.max(np.abs(brownian_model.matrix - want)) < 1e-12
        assert brownian_model.source == "analytic-exponential"

    def test_exponential_diagonal_is_var_G(self, fig1_kernel, fig1_claims, fig1_params):
        model = build_covariance(fig1_kernel, fig1_claims, TimeGrid(1.0, 0.01))
        want = var_G(fig1_params, fig1_claims, model.times)
        assert np.allclose(np.diag(model.matrix), want, rtol=1e-10)
        assert model.matrix[-1, -1] == pytest.approx(2.6169074430876, rel=1e-9)

    def test_grid_coarsening_consistency(self, fig1_kernel, fig1_claims):
        fine = build_covariance(fig1_kernel, fig1_claims, TimeGrid(1.0, 0.05))
        coarse_grid = TimeGrid(1.0, 0.1)
        coarse = build_covariance(fig1_kernel, fig1_claims, coarse_grid)
        # fine nodes t_2, t_4, ... are the coarse nodes
        sub = fine.restricted(np.arange(1, fine.times.size, 2), coarse_grid)
        assert np.max(np.abs(sub.matrix - coarse.matrix)) < 1e-12

    def test_asymmetric_matrix_rejected(self):
        grid = TimeGrid(1.0, 0.5)
        bad = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(InvalidParameter):
            CovarianceModel(grid, bad, "analytic-exponential")

    def test_mc_route_needs_min_paths(self, fig1_claims):
        tab = TabulatedKernel(np.linspace(0.0, 20.0, 400),
                              0.3 * np.exp(-0.5 * np.linspace(0.0, 20.0, 400)))
        with pytest.raises(InsufficientSamples):
            build_covariance(tab, fig1_claims, TimeGrid(1.0, 0.25), mc_paths=500)

    def test_mc_route_close_to_analytic(self, fig1_claims, fig1_params):
        # tabulated copy of the Fig-1 kernel routes through Prop-1 diagonal + MC
        tgrid = np.linspace(0.0, 30.0, 3001)
        tab = TabulatedKernel(tgrid, 0.3 * np.exp(-0.5 * tgrid))
        grid = TimeGrid(1.0, 0.25)
        model = build_covariance(tab, fig1_claims, grid, mc_mu=200.0, mc_paths=2000,
                                 seed=5)
        assert model.source == "mc-estimated"
        assert model.n_paths == 2000
        analytic = ax.cov_G_matrix(fig1_params, fig1_claims, grid.nodes[1:])
        # diagonal is from the Volterra integrals
        assert np.allclose(np.diag(model.matrix), np.diag(analytic), rtol=1e-3)
        # off-diagonals are MC with shrinkage: 6 SE tolerance
        n = model.n_paths
        for i in range(3):
            for j in range(i + 1, 4):
                se = np.sqrt((analytic[i, i] * analytic[j, j] + analytic[i, j] ** 2) / n)
                assert abs(model.matrix[i, j] - analytic[i, j]) < 6 * se


class TestSampler:
    def test_cholesky_round_trip(self, fig1_kernel, fig1_claims):
        model = build_covariance(fig1_kernel, fig1_claims, TimeGrid(1.0, 0.005))
        sampler = make_sampler(model)
        jittered = model.matrix + sampler.jitter * np.max(np.diag(model.matrix)) * np.eye(
            model.matrix.shape[0])
        rel = (np.linalg.norm(sampler.cholesky @ sampler.cholesky.T - jittered, "fro")
               / np.linalg.norm(model.matrix, "fro"))
        assert rel <= 1e-8
        assert sampler.jitter <= 1e-6

    def test_sample_shape_and_pinned_origin(self, brownian_model):
        sampler = make_sampler(brownian_model)
        paths = sample_G(sampler, 50, seed=3)
        assert paths.shape == (50, brownian_model.grid.n_points)
        assert np.all(paths[:, 0] == 0.0)

    def test_block_invariance(self, brownian_model):
        sampler = make_sampler(brownian_model)
        whole = sample_G(sampler, 10, seed=3)
        parts = np.concatenate([sample_G(sampler, 4, seed=3, path_offset=0),
                                sample_G(sampler, 6, seed=3, path_offset=4)])
        assert np.array_equal(whole, parts)

    def test_marginal_variance_and_mean(self, fig1_kernel, fig1_claims, fig1_params):
        model = build_covariance(fig1_kernel, fig1_claims, TimeGrid(1.0, 0.1))
        sampler = make_sampler(model)
        paths = sample_G(sampler, 40000, seed=4)
        want = float(var_G(fig1_params, fig1_claims, 1.0))
        terminal = paths[:, -1]
        se_var = np.sqrt(2.0 / (terminal.size - 1)) * want
        assert abs(terminal.var(ddof=1) - want) < 4 * se_var
        se_mean = np.sqrt(want / terminal.size)
        assert np.all(np.abs(paths.mean(axis=0)) < 4 * np.sqrt(
            np.maximum(np.diag(model.matrix).max(), 1e-30) / paths.shape[0]))
        assert abs(terminal.mean()) < 4 * se_mean

    def test_brownian_increments_uncorrelated(self, brownian_model):
        sampler = make_sampler(brownian_model)
        paths = sample_G(sampler, 30000, seed=6)
        inc1 = paths[:, 40] - paths[:, 20]
        inc2 = paths[:, 90] - paths[:, 70]
        corr = np.corrcoef(inc1, inc2)[0, 1]
        assert abs(corr) < 4 / np.sqrt(paths.shape[0])


class TestFcltCheck:
    def test_poisson_case_passes(self):
        report = fclt_check(ZeroKernel(), ExponentialClaims(1.0), 200.0,
                            TimeGrid(1.0, 0.1), 4000, seed=7)
        assert report.ks_pvalue > 0.01
        assert report.max_cov_dev_se < 5.0
        assert report.var_T_model == pytest.approx(2.0)

    def test_fig1_desk_scale(self, fig1_kernel, fig1_claims):
        report = fclt_check(fig1_kernel, fig1_claims, 200.0, TimeGrid(1.0, 0.1),
                            4000, seed=8)
        assert report.ks_pvalue > 0.01
        assert report.max_cov_dev_se < 5.0

    def test_report_serializes(self, tmp_path, fig1_kernel, fig1_claims):
        report = fclt_check(fig1_kernel, fig1_claims, 50.0, TimeGrid(1.0, 0.25),
                            500, seed=9)
        dest = tmp_path / "report.json"
        report.to_json(dest)
        import json

        payload = json.loads(dest.read_text())
        assert payload["mu"] == 50.0
        assert "ks_pvalue" in payload

    def test_increasing_kernel_rejected(self, fig1_claims):
        rising = TabulatedKernel(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.4, 0.0]))
        with pytest.raises(InvalidParameter):
            fclt_check(rising, fig1_claims, 10.0, TimeGrid(1.0, 0.25), 100, seed=0)

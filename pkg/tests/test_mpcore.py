"""Core movement-primitive tests: basis construction, fitting, distributions."""

import math

import numpy as np
import pytest

from famp import mpcore as mp
from famp.errors import (
    ConfigurationError,
    IllConditionedError,
    InsufficientDataError,
    NumericError,
    ShapeError,
)


@pytest.fixture(scope="module")
def grid():
    return mp.TimeGrid(1.0, 101)


@pytest.fixture(scope="module")
def cfg():
    return mp.DmpConfig(tau=1.0, n_basis=8)


@pytest.fixture(scope="module")
def basis(cfg, grid):
    return mp.build_basis(cfg, grid)


@pytest.fixture(scope="module")
def promp_basis(cfg, grid):
    return mp.build_basis(cfg, grid, kind="promp")


class TestTimeGrid:
    def test_dt_and_times(self):
        grid = mp.TimeGrid(2.0, 5)
        assert grid.dt == pytest.approx(0.5)
        t = grid.times()
        assert t[0] == 0.0 and t[-1] == 2.0
        assert np.all(np.diff(t) > 0)
        np.testing.assert_allclose(np.diff(t), grid.dt, rtol=1e-12)

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            mp.TimeGrid(1.0, 1)
        with pytest.raises(ConfigurationError):
            mp.TimeGrid(0.0, 10)
        with pytest.raises(ConfigurationError):
            mp.TimeGrid(-1.0, 10)


class TestPhase:
    def test_initial_value(self, cfg, grid):
        x = mp.build_phase(cfg, grid)
        assert x[0] == 1.0

    def test_closed_form(self):
        # x(t) = exp(-alpha_x * t / tau), evaluated directly
        cfg = mp.DmpConfig(alpha_x=2.0, tau=1.0)
        grid = mp.TimeGrid(1.0, 11)
        x = mp.build_phase(cfg, grid)
        assert x[-1] == pytest.approx(math.exp(-2.0), rel=1e-12)

        cfg2 = mp.DmpConfig(alpha_x=4.0, tau=2.0)
        grid2 = mp.TimeGrid(2.0, 11)
        x2 = mp.build_phase(cfg2, grid2)
        assert x2[-1] == pytest.approx(math.exp(-4.0), rel=1e-12)

    def test_strictly_decreasing(self, cfg, grid):
        x = mp.build_phase(cfg, grid)
        assert np.all(np.diff(x) < 0)

    def test_invalid_config(self):
        with pytest.raises(ConfigurationError):
            mp.DmpConfig(alpha_x=-1.0)
        with pytest.raises(ConfigurationError):
            mp.DmpConfig(tau=0.0)
        with pytest.raises(ConfigurationError):
            mp.DmpConfig(n_basis=1)


class TestBuildBasis:
    def test_initial_conditions(self, basis):
        assert basis.xi1[0] == 1.0
        assert basis.xi2[0] == 0.0
        assert np.all(basis.phi[0] == 0.0)

    def test_attractor_fixed_point(self, basis):
        # zero weights, goal g, start at rest at g -> constant trajectory
        g = 0.7
        omega = np.zeros(basis.n_weights_per_dim)
        omega[-1] = g
        traj = mp.compose_mean(basis, omega, mp.InitialState.rest([g]))
        np.testing.assert_allclose(traj.values, g, rtol=0, atol=1e-12)

    def test_superposition_against_direct_integration(self, cfg, grid, basis):
        # compose(w_a + w_b) equals compose(w_a) + compose(w_b), and both
        # match a direct integration of the summed forcing term.
        rng = np.random.default_rng(7)
        omega_a = rng.normal(size=basis.n_weights_per_dim)
        omega_b = rng.normal(size=basis.n_weights_per_dim)
        zero = mp.InitialState.zeros(1)
        ya = mp.compose_mean(basis, omega_a, zero).values
        yb = mp.compose_mean(basis, omega_b, zero).values
        yab = mp.compose_mean(basis, omega_a + omega_b, zero).values
        np.testing.assert_allclose(yab, ya + yb, atol=1e-9)

        w, g = mp.split_weights(omega_a + omega_b, cfg.n_basis)
        direct = mp.integrate_dmp(cfg, w, g, zero, grid).values
        np.testing.assert_allclose(yab, direct, atol=1e-9)

    def test_promp_shape(self, promp_basis, grid):
        assert np.all(promp_basis.xi1 == 0.0)
        assert np.all(promp_basis.xi2 == 0.0)
        # basis values normalized, goal column constant one
        np.testing.assert_allclose(promp_basis.phi[:, :-1].sum(axis=1), 1.0, atol=1e-12)
        assert np.all(promp_basis.phi[:, -1] == 1.0)

    def test_bad_kind(self, cfg, grid):
        with pytest.raises(ConfigurationError):
            mp.build_basis(cfg, grid, kind="nope")


class TestComposeMean:
    def test_zero_weights_homogeneous(self, basis):
        y_b = np.array([1.5, -2.0])
        init = mp.InitialState.rest(y_b)
        traj = mp.compose_mean(basis, np.zeros(2 * basis.n_weights_per_dim), init)
        expected = np.outer(basis.xi1, y_b)
        np.testing.assert_allclose(traj.values, expected, atol=1e-15)

    def test_promp_ignores_initial_state(self, promp_basis):
        init = mp.InitialState(np.array([3.0]), np.array([-1.0]))
        traj = mp.compose_mean(promp_basis, np.zeros(promp_basis.n_weights_per_dim), init)
        assert np.all(traj.values == 0.0)

    def test_starts_exactly_at_initial_position(self, basis):
        rng = np.random.default_rng(3)
        init = mp.InitialState(rng.normal(size=2), rng.normal(size=2))
        omega = rng.normal(size=2 * basis.n_weights_per_dim)
        traj = mp.compose_mean(basis, omega, init)
        assert np.array_equal(traj.values[0], init.position)

    def test_forward_difference_velocity(self, basis):
        rng = np.random.default_rng(4)
        init = mp.InitialState(0.1 * rng.normal(size=2), 0.1 * rng.normal(size=2))
        omega = 0.05 * rng.normal(size=2 * basis.n_weights_per_dim)
        traj = mp.compose_mean(basis, omega, init)
        dt = basis.grid.dt
        fd = (traj.values[1] - traj.values[0]) / dt
        assert np.all(np.abs(fd - init.velocity) <= 10 * dt)

    def test_linearity(self, basis):
        rng = np.random.default_rng(5)
        nb1 = basis.n_weights_per_dim
        o1, o2 = rng.normal(size=nb1), rng.normal(size=nb1)
        i1 = mp.InitialState(rng.normal(size=1), rng.normal(size=1))
        i2 = mp.InitialState(rng.normal(size=1), rng.normal(size=1))
        a, b = 0.3, -1.7
        combo = mp.compose_mean(
            basis,
            a * o1 + b * o2,
            mp.InitialState(a * i1.position + b * i2.position,
                            a * i1.velocity + b * i2.velocity),
        )
        parts = a * mp.compose_mean(basis, o1, i1).values + b * mp.compose_mean(basis, o2, i2).values
        np.testing.assert_allclose(combo.values, parts, atol=1e-9)

    def test_dimension_mismatch(self, basis):
        with pytest.raises(ShapeError):
            mp.compose_mean(basis, np.zeros(basis.n_weights_per_dim), mp.InitialState.zeros(2))


class TestFitWeights:
    def test_round_trip(self, basis):
        rng = np.random.default_rng(11)
        omega_true = rng.normal(size=2 * basis.n_weights_per_dim)
        init = mp.InitialState(rng.normal(size=2), rng.normal(size=2))
        traj = mp.compose_mean(basis, omega_true, init)
        omega_fit = mp.fit_weights(traj, basis, init, ridge=1e-12)
        rel = np.abs(omega_fit - omega_true).max() / np.abs(omega_true).max()
        assert rel < 1e-6

    def test_constant_trajectory_fit(self, basis):
        y_b = 0.8
        traj = mp.Trajectory(basis.grid, np.full((basis.grid.n_steps, 1), y_b))
        omega = mp.fit_weights(traj, basis, mp.InitialState.rest([y_b]))
        w, g = mp.split_weights(omega, basis.n_basis)
        assert g[0] == pytest.approx(y_b, abs=1e-6)
        assert np.abs(w).max() < 1e-6

    def test_grid_mismatch(self, basis):
        other = mp.TimeGrid(1.0, 51)
        traj = mp.Trajectory(other, np.zeros((51, 1)))
        with pytest.raises(ShapeError):
            mp.fit_weights(traj, basis, mp.InitialState.zeros(1))

    def test_rank_deficient_without_ridge(self, cfg):
        # more weights than samples makes the normal equations singular
        tiny = mp.TimeGrid(1.0, 5)
        b = mp.build_basis(cfg, tiny)
        traj = mp.Trajectory(tiny, np.zeros((5, 1)))
        with pytest.raises(IllConditionedError):
            mp.fit_weights(traj, b, mp.InitialState.zeros(1), ridge=0.0)


class TestWeightDistribution:
    def test_identical_vectors(self):
        v = np.array([1.0, -2.0, 3.0])
        wd = mp.fit_weight_distribution([v, v], eps_reg=1e-8, n_dims=1)
        np.testing.assert_array_equal(wd.mu_omega, v)
        np.testing.assert_allclose(wd.sigma_omega, 1e-8 * np.eye(3), atol=1e-20)

    def test_hand_computed_variance(self):
        # vectors {0, 2}: mean 1, unbiased variance 2
        wd = mp.fit_weight_distribution([np.array([0.0]), np.array([2.0])],
                                        eps_reg=0.0, n_dims=1)
        assert wd.mu_omega[0] == pytest.approx(1.0)
        assert wd.sigma_omega[0, 0] == pytest.approx(2.0)

    def test_single_vector_rejected(self):
        with pytest.raises(InsufficientDataError):
            mp.fit_weight_distribution([np.zeros(3)], n_dims=1)

    def test_psd_validation(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
        with pytest.raises(NumericError):
            mp.WeightDistribution(np.zeros(2), bad, n_dims=1)


class TestTrajectoryDistribution:
    def test_zero_covariance_noise_only(self, basis):
        nb1 = basis.n_weights_per_dim
        s = 0.25
        wd = mp.WeightDistribution(np.zeros(nb1), np.zeros((nb1, nb1)), n_dims=1,
                                   sigma_n_sq=s)
        td = mp.trajectory_distribution(wd, basis, mp.InitialState.zeros(1))
        np.testing.assert_allclose(td.sigma_lambda, s * np.eye(basis.grid.n_steps),
                                   atol=1e-15)

    def test_zero_init_mean_is_pure_pushforward(self, basis):
        rng = np.random.default_rng(2)
        nb1 = basis.n_weights_per_dim
        mu = rng.normal(size=nb1)
        wd = mp.WeightDistribution(mu, np.zeros((nb1, nb1)), n_dims=1)
        td = mp.trajectory_distribution(wd, basis, mp.InitialState.zeros(1))
        np.testing.assert_allclose(td.mu_lambda, basis.phi @ mu, atol=1e-15)

    def test_monte_carlo_agreement(self, basis):
        # Empirical pushforward of sampled weights must match the analytic
        # distribution (small version of the acceptance-scale check).
        rng = np.random.default_rng(12)
        nb1 = basis.n_weights_per_dim
        a = rng.normal(size=(2 * nb1, 2 * nb1))
        sigma = 0.1 * a @ a.T
        mu = rng.normal(size=2 * nb1)
        wd = mp.WeightDistribution(mu, sigma, n_dims=2, sigma_n_sq=0.0)
        init = mp.InitialState(rng.normal(size=2), rng.normal(size=2))
        td = mp.trajectory_distribution(wd, basis, init)

        n = 20000
        chol = np.linalg.cholesky(sigma + 1e-15 * np.eye(2 * nb1))
        draws = mu + rng.standard_normal((n, 2 * nb1)) @ chol.T
        flat = np.array([
            mp.flatten_dim_major(mp.compose_mean(basis, om, init).values)
            for om in draws
        ])
        emp_mean = flat.mean(axis=0)
        stderr = flat.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(emp_mean - td.mu_lambda) <= 4 * stderr + 1e-12)

        emp_cov = np.cov(flat.T, ddof=1)
        rel = np.linalg.norm(emp_cov - td.sigma_lambda) / np.linalg.norm(td.sigma_lambda)
        assert rel < 0.05

    def test_pointwise_std_matches_full(self, basis):
        rng = np.random.default_rng(13)
        nb1 = basis.n_weights_per_dim
        a = rng.normal(size=(2 * nb1, 2 * nb1))
        wd = mp.WeightDistribution(rng.normal(size=2 * nb1), a @ a.T, n_dims=2,
                                   sigma_n_sq=1e-4)
        init = mp.InitialState.zeros(2)
        td = mp.trajectory_distribution(wd, basis, init)
        np.testing.assert_allclose(mp.pointwise_std(wd, basis), td.std_matrix(),
                                   rtol=1e-9, atol=1e-12)


class TestSampling:
    def test_zero_variance_samples_equal_mean(self, basis):
        nb1 = basis.n_weights_per_dim
        mu = np.linspace(-1, 1, nb1)
        wd = mp.WeightDistribution(mu, np.zeros((nb1, nb1)), n_dims=1)
        init = mp.InitialState.zeros(1)
        mean = mp.compose_mean(basis, mu, init)
        for traj in mp.sample_trajectories(wd, basis, init, 3, seed=0):
            np.testing.assert_array_equal(traj.values, mean.values)

    def test_seed_determinism(self, basis):
        nb1 = basis.n_weights_per_dim
        rng = np.random.default_rng(14)
        a = rng.normal(size=(nb1, nb1))
        wd = mp.WeightDistribution(rng.normal(size=nb1), a @ a.T, n_dims=1)
        init = mp.InitialState.zeros(1)
        s1 = mp.sample_trajectories(wd, basis, init, 5, seed=42)
        s2 = mp.sample_trajectories(wd, basis, init, 5, seed=42)
        for t1, t2 in zip(s1, s2):
            np.testing.assert_array_equal(t1.values, t2.values)

    def test_sample_mean_statistics(self, basis):
        # 1-D weight coordinate: sample mean within 4 standard errors
        nb1 = basis.n_weights_per_dim
        mu = np.zeros(nb1)
        mu[0] = 2.0
        sigma = np.zeros((nb1, nb1))
        sigma[0, 0] = 0.5
        wd = mp.WeightDistribution(mu, sigma, n_dims=1)
        n = 10000
        rng_check = np.random.default_rng(99)
        del rng_check
        trajs = mp.sample_trajectories(wd, basis, mp.InitialState.zeros(1), n, seed=7)
        # recover the single random weight from each sample via the fit
        coeff = np.array([
            mp.fit_weights(t, basis, mp.InitialState.zeros(1))[0] for t in trajs[:2000]
        ])
        stderr = coeff.std(ddof=1) / math.sqrt(coeff.size)
        assert abs(coeff.mean() - 2.0) <= 4 * stderr


class TestIntegrateDmp:
    def test_constant_at_goal(self, cfg, grid):
        init = mp.InitialState.rest([0.4])
        traj = mp.integrate_dmp(cfg, np.zeros((1, cfg.n_basis)), [0.4], init, grid)
        np.testing.assert_allclose(traj.values, 0.4, atol=1e-12)

    def test_goal_convergence(self, cfg):
        # with zero weights the attractor converges to the goal; doubling
        # the duration shrinks the boundary gap
        init = mp.InitialState.rest([0.0])
        g = [1.0]
        w = np.zeros((1, cfg.n_basis))
        short = mp.integrate_dmp(cfg, w, g, init, mp.TimeGrid(1.0, 101))
        long = mp.integrate_dmp(cfg, w, g, init, mp.TimeGrid(2.0, 201))
        gap_short = abs(short.values[-1, 0] - 1.0)
        gap_long = abs(long.values[-1, 0] - 1.0)
        assert gap_long < gap_short
        assert gap_long < 1e-6

    def test_agreement_with_compose(self, cfg, grid, basis):
        rng = np.random.default_rng(21)
        for _ in range(5):
            omega = rng.normal(size=2 * basis.n_weights_per_dim)
            init = mp.InitialState(rng.normal(size=2), rng.normal(size=2))
            w, g = mp.split_weights(omega, cfg.n_basis)
            direct = mp.integrate_dmp(cfg, w, g, init, grid)
            composed = mp.compose_mean(basis, omega, init)
            assert np.abs(direct.values - composed.values).max() < 1e-6


class TestCholeskyJitter:
    def test_zero_matrix(self):
        assert np.all(mp.cholesky_with_jitter(np.zeros((3, 3))) == 0.0)

    def test_near_singular(self):
        a = np.ones((4, 4))  # rank one
        chol = mp.cholesky_with_jitter(a)
        np.testing.assert_allclose(chol @ chol.T, a, atol=1e-4)

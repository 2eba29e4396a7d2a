"""Monte Carlo layer: reproducibility, covariance oracles, picture
equivalence, parameter estimation, and the measurement-rescaling analysis."""

import math

import numpy as np
import pytest

from cvmdi import montecarlo as mc
from cvmdi.keyrate import analytic_k, secret_key_rate
from cvmdi.protocol import (
    compose_eb_analytic,
    effective_transmittance,
    equivalent_excess_noise,
    optimal_gain,
)
from conftest import make_scenario

N_FAST = 200_000
SEED = 20260823


@pytest.fixture(scope="module")
def scenario():
    return make_scenario(5.0, 2.0)


@pytest.fixture(scope="module")
def eb_batch(scenario):
    return mc.simulate_eb(scenario, None, N_FAST, SEED)


@pytest.fixture(scope="module")
def pm_batch(scenario):
    return mc.simulate_pm(scenario, analytic_k(scenario), N_FAST, SEED + 1)


class TestReproducibility:
    def test_eb_bit_identical(self, scenario, eb_batch):
        again = mc.simulate_eb(scenario, None, N_FAST, SEED)
        assert np.array_equal(eb_batch.data_matrix(), again.data_matrix())

    def test_pm_bit_identical(self, scenario, pm_batch):
        again = mc.simulate_pm(scenario, pm_batch.coeff, N_FAST, SEED + 1)
        assert np.array_equal(pm_batch.data_matrix(), again.data_matrix())

    def test_seed_changes_samples(self, scenario, eb_batch):
        other = mc.simulate_eb(scenario, None, N_FAST, SEED + 7)
        assert not np.array_equal(eb_batch.x_a, other.x_a)

    def test_rejects_empty_batch(self, scenario):
        with pytest.raises(ValueError):
            mc.simulate_eb(scenario, None, 0, SEED)


class TestCovarianceOracle:
    def test_final_data_matches_analytic_image(self, scenario, eb_batch):
        predicted = mc.heterodyne_image(compose_eb_analytic(scenario))
        z = mc.covariance_z_scores(
            mc.batch_outcome_covariance(eb_batch), predicted, N_FAST)
        assert np.max(np.abs(z)) < 4.0

    def test_relay_outcome_variances(self, scenario, eb_batch):
        # C and D are full quadrature readings of the mixed channel outputs
        eta_a = scenario.channel_a.transmittance
        eta_b = scenario.channel_b.transmittance
        from cvmdi.protocol import entangling_cloner_variance
        va = eta_a * scenario.v_a + (1 - eta_a) * entangling_cloner_variance(
            eta_a, scenario.channel_a.excess_noise)
        vb = eta_b * scenario.v_b + (1 - eta_b) * entangling_cloner_variance(
            eta_b, scenario.channel_b.excess_noise)
        expected = (va + vb) / 2.0
        assert np.var(eb_batch.x_c) == pytest.approx(expected, rel=0.02)
        assert np.var(eb_batch.p_d) == pytest.approx(expected, rel=0.02)

    def test_kurtosis_is_gaussian(self, eb_batch):
        # excess kurtosis of every final column consistent with normality
        for col in eb_batch.columns().values():
            std = col.std()
            kurt = np.mean(((col - col.mean()) / std) ** 4) - 3.0
            assert abs(kurt) < 6.0 * math.sqrt(24.0 / N_FAST)

    def test_wrong_prediction_is_rejected(self, scenario, eb_batch):
        predicted = mc.heterodyne_image(compose_eb_analytic(scenario)) * 1.05
        z = mc.covariance_z_scores(
            mc.batch_outcome_covariance(eb_batch), predicted, N_FAST)
        assert np.max(np.abs(z)) > 10.0


class TestAmplificationFit:
    def test_matches_gain_bridge(self, scenario, eb_batch):
        k_hat = mc.fit_amplification(eb_batch)
        assert k_hat == pytest.approx(
            mc.k_from_gain(eb_batch.coeff, scenario.v_b), rel=0.01)

    def test_bridge_round_trip(self):
        assert mc.gain_from_k(mc.k_from_gain(1.7, 40.0), 40.0) == pytest.approx(1.7)

    def test_requires_eb_batch(self, pm_batch):
        with pytest.raises(ValueError):
            mc.fit_amplification(pm_batch)


class TestPictureEquivalence:
    def test_joint_covariances_agree(self, scenario):
        report = mc.pm_eb_equivalence_test(scenario, n=N_FAST, seed_pair=(SEED, SEED + 1))
        assert report.passed, f"max|z|={report.max_abs_z}"
        assert report.k_used == pytest.approx(
            mc.k_from_gain(report.g_used, scenario.v_b), rel=0.01)

    def test_negative_control_double_k_fails(self, scenario):
        k = 2.0 * mc.k_from_gain(optimal_gain(scenario), scenario.v_b)
        report = mc.pm_eb_equivalence_test(
            scenario, n=N_FAST, seed_pair=(SEED, SEED + 1), k=k)
        assert not report.passed


class TestParameterEstimation:
    def test_eb_round_trip(self, scenario, eb_batch):
        est = mc.estimate_params(eb_batch)
        assert abs(est.t_hat - effective_transmittance(scenario)) < 4.0 * est.t_se
        assert abs(est.eps_hat - equivalent_excess_noise(scenario)) < 4.0 * est.eps_se

    def test_pm_round_trip(self, scenario, pm_batch):
        est = mc.estimate_params(pm_batch)
        assert abs(est.t_hat - effective_transmittance(scenario)) < 4.0 * est.t_se
        assert abs(est.eps_hat - equivalent_excess_noise(scenario)) < 4.0 * est.eps_se

    def test_generative_round_trip(self):
        t_in, eps_in = 0.5, 0.1
        batch = mc.sample_block_cm(40.0, t_in, eps_in, 400_000, seed=SEED)
        est = mc.estimate_params(batch)
        assert abs(est.t_hat - t_in) < 4.0 * est.t_se
        assert abs(est.eps_hat - eps_in) < 4.0 * est.eps_se

    def test_rejects_tiny_batches(self, scenario):
        small = mc.simulate_eb(scenario, None, 100, SEED)
        with pytest.raises(ValueError):
            mc.estimate_params(small)


class TestRescalingAnalysis:
    def grid(self, scenario):
        k0 = analytic_k(scenario)
        return k0 * np.logspace(np.log10(0.3), np.log10(3.0), 2001)

    def test_maximum_rate_is_invariant(self, scenario, pm_batch):
        grid = self.grid(scenario)
        base = mc.key_rates_vs_k_from_batch(pm_batch, grid, scenario.beta_r)
        for eta in (0.25, 0.64, 1.44):
            scaled = mc.key_rates_vs_k_from_batch(
                mc.lo_scaling_attack(pm_batch, eta), grid, scenario.beta_r)
            assert abs(float(np.max(base)) - float(np.max(scaled))) < 1e-3

    def test_argmax_scales_inversely(self, scenario, pm_batch):
        grid = self.grid(scenario)
        base = mc.key_rates_vs_k_from_batch(pm_batch, grid, scenario.beta_r)
        k_base = grid[int(np.argmax(base))]
        for eta in (0.25, 0.64, 1.44):
            scaled = mc.key_rates_vs_k_from_batch(
                mc.lo_scaling_attack(pm_batch, eta), grid, scenario.beta_r)
            k_scaled = grid[int(np.argmax(scaled))]
            assert k_scaled * math.sqrt(eta) == pytest.approx(k_base, rel=0.01)

    def test_fixed_k_negative_control(self, scenario, pm_batch):
        k0 = np.array([analytic_k(scenario)])
        base = float(mc.key_rates_vs_k_from_batch(pm_batch, k0, scenario.beta_r)[0])
        scaled = float(mc.key_rates_vs_k_from_batch(
            mc.lo_scaling_attack(pm_batch, 0.64), k0, scenario.beta_r)[0])
        assert abs(base - scaled) > 1e-2

    def test_batch_rate_matches_analytic(self, scenario, pm_batch):
        k0 = np.array([analytic_k(scenario)])
        empirical = float(mc.key_rates_vs_k_from_batch(pm_batch, k0, scenario.beta_r)[0])
        assert empirical == pytest.approx(secret_key_rate(scenario).k, abs=0.02)

    def test_rejects_eb_batch(self, eb_batch):
        with pytest.raises(ValueError):
            mc.key_rates_vs_k_from_batch(eb_batch, [1.0])

    def test_rejects_bad_scale(self, pm_batch):
        with pytest.raises(ValueError):
            mc.lo_scaling_attack(pm_batch, 0.0)


class TestExport:
    def test_csv_round_trip(self, scenario, tmp_path):
        batch = mc.simulate_pm(scenario, 1.3, 500, SEED)
        path = tmp_path / "samples.csv"
        mc.export_csv(batch, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == "X_A,P_A,X_B,P_B,X_C,P_D"
        data = np.loadtxt(lines[2:], delimiter=",")
        assert np.array_equal(data, batch.data_matrix())

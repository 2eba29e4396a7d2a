"""Monte Carlo verification suites driven by the `oracle` CLI subcommand."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import montecarlo as mc
from .gaussian import CovarianceMatrix
from .keyrate import scenario_block_params
from .protocol import Scenario, optimal_gain


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _cov_suite(scenario: Scenario, n: int, seed: int, wrong_sign: bool) -> SuiteResult:
    """Empirical covariance of the final data vs the analytic prediction."""
    g = optimal_gain(scenario)
    batch = mc.simulate_eb(scenario, g, n, seed)
    if wrong_sign:
        # test hook: displacement applied with inverted sign
        batch = replace(
            batch,
            x_b_final=batch.x_b - g / np.sqrt(2.0) * batch.x_c,
            p_b_final=batch.p_b - g / np.sqrt(2.0) * batch.p_d,
        )
    a, b, c = scenario_block_params(scenario, g)
    predicted = mc.heterodyne_image(CovarianceMatrix(np.block([
        [a * np.eye(2), np.diag([c, -c])],
        [np.diag([c, -c]), b * np.eye(2)],
    ])))
    z = mc.covariance_z_scores(mc.batch_outcome_covariance(batch), predicted, n)
    zmax = float(np.max(np.abs(z)))
    return SuiteResult("covariance_vs_analytic", zmax < 4.0, f"max|z|={zmax:.2f}")


def _estimation_suite(scenario: Scenario, n: int, seed: int) -> SuiteResult:
    from .protocol import effective_transmittance, equivalent_excess_noise

    batch = mc.simulate_eb(scenario, None, n, seed)
    est = mc.estimate_params(batch)
    t_true = effective_transmittance(scenario)
    eps_true = equivalent_excess_noise(scenario)
    zt = abs(est.t_hat - t_true) / est.t_se
    ze = abs(est.eps_hat - eps_true) / est.eps_se
    return SuiteResult("parameter_estimation_roundtrip", zt < 4.0 and ze < 4.0,
                       f"z(T)={zt:.2f} z(eps')={ze:.2f}")


def _equivalence_suite(scenario: Scenario, n: int, seed: int) -> SuiteResult:
    report = mc.pm_eb_equivalence_test(scenario, n=n, seed_pair=(seed, seed + 1))
    return SuiteResult("pm_eb_equivalence", report.passed,
                       f"max|z|={report.max_abs_z:.2f} k={report.k_used:.4f}")


def _attack_suite(scenario: Scenario, n: int, seed: int) -> SuiteResult:
    from .keyrate import analytic_k

    k0 = analytic_k(scenario)
    # dense grid around the optimum so quantization of the max is << tolerance
    grid = k0 * np.logspace(np.log10(0.3), np.log10(3.0), 2001)
    batch = mc.simulate_pm(scenario, k0, n, seed)
    base = mc.key_rates_vs_k_from_batch(batch, grid, scenario.beta_r)
    scaled = mc.key_rates_vs_k_from_batch(
        mc.lo_scaling_attack(batch, 0.64), grid, scenario.beta_r)
    dmax = abs(float(np.max(base)) - float(np.max(scaled)))
    return SuiteResult("measurement_rescaling_invariance", dmax < 1e-3,
                       f"|dK_max|={dmax:.2e}")


def run_oracle_suites(scenario: Scenario, n: int, seed: int,
                      wrong_sign: bool = False) -> list[SuiteResult]:
    return [
        _cov_suite(scenario, n, seed, wrong_sign),
        _estimation_suite(scenario, n, seed + 100),
        _equivalence_suite(scenario, n, seed + 200),
        _attack_suite(scenario, n, seed + 300),
    ]

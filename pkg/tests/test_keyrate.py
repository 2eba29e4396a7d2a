"""Key-rate formulas, distance sweeps, and the k-grid detection optimizer."""

import math

import numpy as np
import pytest

from cvmdi.gaussian import CovarianceMatrix
from cvmdi.keyrate import (
    analytic_k,
    block_form_params,
    default_k_grid,
    holevo_bound_reverse,
    holevo_bound_reverse_generic,
    key_rate_at,
    key_rate_vs_k,
    max_distance_asymmetric,
    max_distance_detection_scheme,
    max_total_distance_symmetric,
    min_detector_efficiency,
    mutual_information,
    mutual_information_generic,
    optimize_k_detection_scheme,
    scenario_block_params,
    secret_key_rate,
    sweep_asymmetric,
    sweep_symmetric,
)
from cvmdi.protocol import compose_eb_analytic, optimal_gain
from conftest import make_scenario, random_scenario


def block_cm(a, b, c):
    return CovarianceMatrix(np.block([
        [a * np.eye(2), np.diag([c, -c])],
        [np.diag([c, -c]), b * np.eye(2)],
    ]))


class TestBlockForm:
    def test_extracts_params(self):
        assert block_form_params(block_cm(5.0, 3.0, 2.0)) == (5.0, 3.0, 2.0)

    def test_rejects_non_block_form(self):
        m = block_cm(5.0, 3.0, 2.0).entries.copy()
        m[0, 1] = m[1, 0] = 0.5
        with pytest.raises(ValueError):
            block_form_params(CovarianceMatrix(m))

    def test_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            block_form_params(CovarianceMatrix(np.eye(2)))


class TestMutualInformation:
    def test_known_value(self):
        # a = b = 40, c = sqrt(1599): maximally correlated two-mode block
        a = b = 40.0
        c = math.sqrt(a * a - 1.0)
        expected = math.log2((a + 1.0) / (a + 1.0 - c * c / (b + 1.0)))
        assert mutual_information(block_cm(a, b, c)) == pytest.approx(expected)
        assert expected == pytest.approx(math.log2(41.0 / (41.0 - 1599.0 / 41.0)))

    def test_uncorrelated_is_zero(self):
        assert mutual_information(block_cm(5.0, 5.0, 0.0)) == pytest.approx(0.0)

    def test_matches_generic_determinant_form(self, rng):
        for _ in range(200):
            a, b = rng.uniform(1.0, 80.0, 2)
            c = rng.uniform(0.0, 0.99) * math.sqrt((a * a - 1.0) * (b * b - 1.0)) ** 0.5
            cm = block_cm(a, b, c)
            assert mutual_information(cm) == pytest.approx(
                mutual_information_generic(cm), abs=1e-10)


class TestHolevoBound:
    def test_matches_generic_entropy_path(self, rng):
        """Closed-form spectrum vs explicit conditioning, to 1e-10."""
        for _ in range(100):
            s = random_scenario(rng)
            cm = compose_eb_analytic(s)
            assert holevo_bound_reverse(cm) == pytest.approx(
                holevo_bound_reverse_generic(cm), abs=1e-10)

    def test_pure_loss_has_positive_bound(self):
        s = make_scenario(20.0, 0.0, eps=0.0)
        assert holevo_bound_reverse(compose_eb_analytic(s)) > 0.0


class TestSecretKeyRate:
    def test_decomposition(self):
        s = make_scenario(2.0, 2.0)
        pt = secret_key_rate(s)
        assert pt.k == pytest.approx(s.beta_r * pt.i_ab - pt.chi_be)
        assert pt.gain_provenance == "optimal"
        assert pt.positive

    def test_fixed_gain_at_optimal_value_matches(self, rng):
        from dataclasses import replace
        for _ in range(30):
            s = random_scenario(rng)
            s_fixed = replace(s, gain_mode="fixed", gain=float(optimal_gain(s)))
            pt_opt, pt_fix = secret_key_rate(s), secret_key_rate(s_fixed)
            assert pt_fix.k == pytest.approx(pt_opt.k, abs=1e-12)
            assert pt_fix.gain_provenance == "fixed"

    def test_detector_penalty_reduces_rate(self):
        ideal = secret_key_rate(make_scenario(5.0, 5.0)).k
        lossy = secret_key_rate(make_scenario(5.0, 5.0, eta_d=0.95)).k
        assert lossy < ideal

    def test_rate_decreases_with_distance(self):
        s = make_scenario()
        rates = [key_rate_at(s, l, l) for l in (0.0, 1.0, 2.0, 3.0)]
        assert all(r1 > r2 for r1, r2 in zip(rates, rates[1:]))

    def test_block_params_match_composition(self, rng):
        for _ in range(50):
            s = random_scenario(rng)
            a, b, c = scenario_block_params(s)
            aa, bb, cc = block_form_params(compose_eb_analytic(s))
            assert (a, b, c) == pytest.approx((aa, bb, cc), abs=1e-12)


class TestDistanceSearch:
    def test_refinement_tolerance(self):
        s = make_scenario()
        total = max_total_distance_symmetric(s)
        # rate is positive just inside and nonpositive just outside
        assert key_rate_at(s, total / 2 - 0.02, total / 2 - 0.02) > 0.0
        assert key_rate_at(s, total / 2 + 0.02, total / 2 + 0.02) <= 0.0

    def test_asymmetric_ordering(self):
        s = make_scenario()
        d = [max_distance_asymmetric(s, l_bc) for l_bc in (0.0, 1.0, 3.0)]
        assert d[0] > d[1] > d[2]

    def test_zero_at_origin_when_dead(self):
        s = make_scenario(eta_d=0.5)  # far below the efficiency threshold
        assert max_total_distance_symmetric(s) == 0.0


class TestSweeps:
    def test_symmetric_shapes_and_axis(self):
        s = make_scenario()
        res = sweep_symmetric(s, np.linspace(0.0, 3.0, 7))
        assert res.axis_name == "L_total_km"
        (curve,) = res.curves
        assert np.allclose(curve.axis_km, 2.0 * np.linspace(0.0, 3.0, 7))
        assert len(curve.points) == 7

    def test_asymmetric_curves(self):
        s = make_scenario()
        res = sweep_asymmetric(s, np.linspace(0.0, 5.0, 6), [0.0, 2.0])
        assert len(res.curves) == 2
        assert res.curves[0].label == "l_bc=0km"
        assert res.curves[1].points[0].k < res.curves[0].points[0].k

    def test_parallel_matches_serial(self):
        s = make_scenario()
        grid = np.linspace(0.0, 3.0, 9)
        serial = sweep_symmetric(s, grid, threads=1)
        parallel = sweep_symmetric(s, grid, threads=3)
        for p1, p2 in zip(serial.curves[0].points, parallel.curves[0].points):
            assert p1.k == p2.k

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            sweep_symmetric(make_scenario(), [])
        with pytest.raises(ValueError):
            sweep_symmetric(make_scenario(), [-1.0])


class TestDetectionSchemeOptimizer:
    def test_analytic_k_is_near_grid_optimum(self):
        s = make_scenario(10.0, 0.0, beta=0.95)
        k_star, rate_star = optimize_k_detection_scheme(s)
        assert k_star == pytest.approx(analytic_k(s), rel=0.02)
        # the grid optimum dominates the analytic point up to grid resolution
        rate_analytic = float(key_rate_vs_k(s, [analytic_k(s)])[0])
        assert rate_star >= rate_analytic - 1e-9

    def test_grid_rate_matches_block_path(self):
        s = make_scenario(10.0, 0.0, beta=0.95)
        k0 = analytic_k(s)
        rate = float(key_rate_vs_k(s, [k0])[0])
        assert rate == pytest.approx(secret_key_rate(s).k, abs=1e-10)

    def test_default_grid_spans_the_optimum(self):
        s = make_scenario(10.0, 0.0)
        grid = default_k_grid(s)
        assert grid[0] < analytic_k(s) < grid[-1]

    def test_rejects_nonpositive_k(self):
        with pytest.raises(ValueError):
            key_rate_vs_k(make_scenario(), [0.0])

    def test_scaled_grid_invariance(self):
        # evaluating on a rescaled grid shifts the argmax, not the maximum
        s = make_scenario(10.0, 0.0, beta=0.95)
        grid = default_k_grid(s, n_points=2001)
        r1 = key_rate_vs_k(s, grid)
        r2 = key_rate_vs_k(s, grid * 1.25)
        assert abs(float(np.max(r1)) - float(np.max(r2))) < 1e-4


class TestDetectorThreshold:
    def test_threshold_is_sharp(self):
        s = make_scenario()
        eta = min_detector_efficiency(s)
        from dataclasses import replace
        from cvmdi.protocol import DetectorParams
        above = replace(s, detector=DetectorParams(eta + 1e-4, 0.0))
        below = replace(s, detector=DetectorParams(eta - 1e-4, 0.0))
        assert key_rate_at(above, 0.0, 0.0) > 0.0
        assert key_rate_at(below, 0.0, 0.0) <= 0.0

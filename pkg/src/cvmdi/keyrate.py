"""Asymptotic reverse-reconciliation secret key rate and sweep drivers."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .gaussian import (
    CovarianceMatrix,
    GaussianState,
    heterodyne_condition,
    von_neumann_entropy,
)
from .protocol import (
    Scenario,
    detector_noise,
    effective_transmittance,
    imperfect_excess_noise,
)

BLOCK_FORM_TOL = 1e-9
BISECT_TOL_KM = 0.01
BISECT_MAX_ITER = 60
MAX_DISTANCE_CAP_KM = 2000.0


@dataclass(frozen=True)
class KeyRatePoint:
    scenario: Scenario
    g_used: float
    i_ab: float
    chi_be: float
    k: float
    gain_provenance: str = "optimal"

    @property
    def positive(self) -> bool:
        return self.k > 0.0


@dataclass(frozen=True)
class SweepCurve:
    label: str
    axis_km: np.ndarray
    points: tuple
    max_distance_km: float  # largest axis value with K > 0 (inf if none found)


@dataclass(frozen=True)
class SweepResult:
    axis_name: str
    curves: tuple


def block_form_params(cov2: CovarianceMatrix) -> tuple[float, float, float]:
    """Extract (a, b, c) from [[a I2, c sigma_z], [c sigma_z, b I2]]."""
    if cov2.n_modes != 2:
        raise ValueError("expected a two-mode covariance matrix")
    m = cov2.entries
    a, b, c = m[0, 0], m[2, 2], m[0, 2]
    ref = np.block([
        [a * np.eye(2), np.diag([c, -c])],
        [np.diag([c, -c]), b * np.eye(2)],
    ])
    if np.max(np.abs(m - ref)) > BLOCK_FORM_TOL:
        raise ValueError("covariance matrix is not in a*I2 / c*sigma_z block form")
    return float(a), float(b), float(c)


def mutual_information(cov2: CovarianceMatrix) -> float:
    """Mutual information of dual-heterodyne data on both modes, bits/use."""
    a, b, c = block_form_params(cov2)
    return float(kernels.block_mutual_information(a, b, c))


def mutual_information_generic(cov2: CovarianceMatrix) -> float:
    """Determinant-based Gaussian MI of the joint heterodyne outcomes."""
    sigma = (cov2.entries + np.eye(4)) / 2.0
    det_a = np.linalg.det(sigma[:2, :2])
    det_b = np.linalg.det(sigma[2:, 2:])
    return float(0.5 * np.log2(det_a * det_b / np.linalg.det(sigma)))


def holevo_bound_reverse(cov2: CovarianceMatrix) -> float:
    """Holevo bound on Eve's information about mode-B heterodyne data."""
    a, b, c = block_form_params(cov2)
    return float(kernels.block_holevo_reverse(a, b, c))


def holevo_bound_reverse_generic(cov2: CovarianceMatrix) -> float:
    """Same bound via full symplectic spectra and explicit conditioning."""
    s_ab = von_neumann_entropy(cov2)
    state = GaussianState(np.zeros(4), cov2)
    remaining, _ = heterodyne_condition(state, mode=1)
    return s_ab - von_neumann_entropy(remaining.cov)


def scenario_block_params(scenario: Scenario, g: float | None = None) -> tuple[float, float, float]:
    """(a, b, c) of the post-protocol covariance, detector penalty included."""
    if g is None:
        g = scenario.resolved_gain()
    t = effective_transmittance(scenario, g)
    eps = imperfect_excess_noise(scenario, g if scenario.gain_mode == "fixed" else None)
    a = scenario.v_a
    b = t * (scenario.v_a - 1.0) + 1.0 + t * eps
    c = math.sqrt(t * (scenario.v_a**2 - 1.0))
    return a, b, c


def secret_key_rate(scenario: Scenario) -> KeyRatePoint:
    g = scenario.resolved_gain()
    a, b, c = scenario_block_params(scenario, g)
    i_ab = float(kernels.block_mutual_information(a, b, c))
    chi = float(kernels.block_holevo_reverse(a, b, c))
    return KeyRatePoint(
        scenario=scenario,
        g_used=g,
        i_ab=i_ab,
        chi_be=chi,
        k=scenario.beta_r * i_ab - chi,
        gain_provenance=scenario.gain_mode,
    )


def key_rate_at(scenario: Scenario, l_ac_km: float, l_bc_km: float) -> float:
    return secret_key_rate(scenario.with_lengths(l_ac_km, l_bc_km)).k


def _bisect_zero(f, lo: float, hi: float, tol: float = BISECT_TOL_KM) -> float:
    """Root of f between lo (f > 0) and hi (f <= 0) by plain bisection."""
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _max_distance(f, cap: float = MAX_DISTANCE_CAP_KM) -> float:
    """Largest axis value with f > 0; inf if f stays positive up to cap."""
    if f(0.0) <= 0.0:
        return 0.0
    hi = 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > cap:
            return math.inf
    return _bisect_zero(f, hi / 2.0, hi)


def max_total_distance_symmetric(scenario: Scenario) -> float:
    """Largest total distance (both legs equal) with positive key rate."""
    leg = _max_distance(lambda l: key_rate_at(scenario, l, l))
    return 2.0 * leg if math.isfinite(leg) else math.inf


def max_distance_asymmetric(scenario: Scenario, l_bc_km: float) -> float:
    """Largest first-leg length with positive key rate at fixed second leg."""
    return _max_distance(lambda l: key_rate_at(scenario, l, l_bc_km))


def _symmetric_point(args) -> KeyRatePoint:
    scenario, l = args
    return secret_key_rate(scenario.with_lengths(l, l))


def _asymmetric_point(args) -> KeyRatePoint:
    scenario, l_ac, l_bc = args
    return secret_key_rate(scenario.with_lengths(l_ac, l_bc))


def _map(fn, jobs, threads: int):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))  # map preserves submission order
    return [fn(j) for j in jobs]


def sweep_symmetric(scenario: Scenario, l_grid, threads: int = 1) -> SweepResult:
    """Key rate vs total distance with both legs equal (grid of leg lengths)."""
    l_grid = np.asarray(l_grid, dtype=float)
    if l_grid.size == 0 or np.any(l_grid < 0):
        raise ValueError("grid must be nonempty and nonnegative")
    points = _map(_symmetric_point, [(scenario, l) for l in l_grid], threads)
    curve = SweepCurve(
        label="symmetric",
        axis_km=2.0 * l_grid,
        points=tuple(points),
        max_distance_km=max_total_distance_symmetric(scenario),
    )
    return SweepResult(axis_name="L_total_km", curves=(curve,))


def sweep_asymmetric(scenario: Scenario, l_ac_grid, l_bc_values, threads: int = 1) -> SweepResult:
    """Key rate vs first-leg length, one curve per second-leg length."""
    l_ac_grid = np.asarray(l_ac_grid, dtype=float)
    l_bc_values = np.atleast_1d(np.asarray(l_bc_values, dtype=float))
    if l_ac_grid.size == 0 or np.any(l_ac_grid < 0) or np.any(l_bc_values < 0):
        raise ValueError("grids must be nonempty and nonnegative")
    curves = []
    for l_bc in l_bc_values:
        points = _map(
            _asymmetric_point, [(scenario, l, l_bc) for l in l_ac_grid], threads
        )
        curves.append(SweepCurve(
            label=f"l_bc={l_bc:g}km",
            axis_km=l_ac_grid.copy(),
            points=tuple(points),
            max_distance_km=max_distance_asymmetric(scenario, l_bc),
        ))
    return SweepResult(axis_name="L_AC_km", curves=tuple(curves))


def analytic_k(scenario: Scenario) -> float:
    """Data-domain amplification coefficient matching the optimal gain."""
    g = scenario.resolved_gain()
    return g * math.sqrt((scenario.v_b - 1.0) / (scenario.v_b + 1.0))


def default_k_grid(scenario: Scenario, n_points: int = 400,
                   span: tuple[float, float] = (0.1, 10.0)) -> np.ndarray:
    k0 = analytic_k(scenario)
    return k0 * np.logspace(np.log10(span[0]), np.log10(span[1]), n_points)


def key_rate_vs_k(scenario: Scenario, k_grid) -> np.ndarray:
    """Key rate at each amplification coefficient of the data processing."""
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.size == 0 or np.any(k_grid <= 0):
        raise ValueError("k grid must be nonempty and positive")
    chi_det = detector_noise(scenario.detector.efficiency, scenario.detector.electronic_noise)
    return np.asarray(kernels.scan_k_rates(
        k_grid,
        scenario.v_a, scenario.v_b,
        scenario.channel_a.transmittance, scenario.channel_b.transmittance,
        scenario.channel_a.excess_noise, scenario.channel_b.excess_noise,
        chi_det, scenario.beta_r,
    ))


def optimize_k_detection_scheme(scenario: Scenario, k_grid=None) -> tuple[float, float]:
    """Best (k, K) over the amplification grid; first index wins on ties."""
    if k_grid is None:
        k_grid = default_k_grid(scenario)
    k_grid = np.asarray(k_grid, dtype=float)
    rates = key_rate_vs_k(scenario, k_grid)
    i = int(np.argmax(rates))
    return float(k_grid[i]), float(rates[i])


def max_distance_detection_scheme(scenario: Scenario, k_grid=None) -> float:
    """Largest first-leg length with positive k-optimized key rate."""
    def best_rate(l: float) -> float:
        s = scenario.with_lengths(l, scenario.channel_b.length_km)
        return optimize_k_detection_scheme(s, k_grid)[1]
    return _max_distance(best_rate)


def min_detector_efficiency(scenario: Scenario, tol: float = 1e-6) -> float:
    """Smallest relay detector efficiency with K > 0 at vanishing distance."""
    from dataclasses import replace

    from .protocol import DetectorParams

    def rate(eta_d: float) -> float:
        s = replace(scenario, detector=DetectorParams(eta_d, scenario.detector.electronic_noise))
        return key_rate_at(s, 0.0, 0.0)

    lo, hi = 0.999999, 0.2
    if rate(lo) <= 0.0:
        raise ValueError("key rate not positive even for a near-perfect detector")
    while rate(hi) > 0.0:
        hi /= 2.0
        if hi < 1e-6:
            return 0.0
    # bisect between hi (K <= 0) and lo (K > 0)
    for _ in range(200):
        if lo - hi <= tol:
            break
        mid = 0.5 * (lo + hi)
        if rate(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

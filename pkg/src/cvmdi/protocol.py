"""Relay-based protocol composition under two independent entangling-cloner
attacks: analytic two-mode output covariance, explicit mode-by-mode Gaussian
composition, gain optimization, and detector-imperfection noise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .gaussian import (
    I2,
    SIGMA_Z,
    CovarianceMatrix,
    GaussianState,
    apply_beamsplitter,
    tensor,
    tms_state,
)

DEFAULT_ATTENUATION_DB_PER_KM = 0.2


@dataclass(frozen=True)
class ChannelParams:
    """One fiber link: length, attenuation, and input-referred excess noise."""

    length_km: float
    attenuation_db_per_km: float = DEFAULT_ATTENUATION_DB_PER_KM
    excess_noise: float = 0.0

    def __post_init__(self):
        if self.length_km < 0:
            raise ValueError(f"channel length {self.length_km} km must be >= 0")
        if self.attenuation_db_per_km <= 0:
            raise ValueError("attenuation must be > 0 dB/km")
        if self.excess_noise < 0:
            raise ValueError("excess noise must be >= 0")

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * self.length_km / 10.0)

    @property
    def chi(self) -> float:
        eta = self.transmittance
        return (1.0 - eta) / eta + self.excess_noise

    @classmethod
    def from_transmittance(cls, eta: float, excess_noise: float = 0.0,
                           attenuation_db_per_km: float = DEFAULT_ATTENUATION_DB_PER_KM):
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"transmittance {eta} outside (0, 1]")
        length = -10.0 * np.log10(eta) / attenuation_db_per_km
        return cls(length, attenuation_db_per_km, excess_noise)


@dataclass(frozen=True)
class DetectorParams:
    """Relay homodyne detector efficiency and electronic noise variance."""

    efficiency: float = 1.0
    electronic_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency {self.efficiency} outside (0, 1]")
        if self.electronic_noise < 0:
            raise ValueError("electronic noise must be >= 0")


@dataclass(frozen=True)
class Scenario:
    """Full protocol parameter set for one key-rate evaluation."""

    v_a: float
    v_b: float
    channel_a: ChannelParams
    channel_b: ChannelParams
    beta_r: float = 1.0
    detector: DetectorParams = field(default_factory=DetectorParams)
    gain_mode: str = "optimal"  # "optimal" | "fixed"
    gain: float | None = None

    def __post_init__(self):
        if self.v_a < 1 or self.v_b < 1:
            raise ValueError("modulation variances must be >= 1")
        if not 0.0 < self.beta_r <= 1.0:
            raise ValueError(f"reconciliation efficiency {self.beta_r} outside (0, 1]")
        if self.gain_mode not in ("optimal", "fixed"):
            raise ValueError(f"unknown gain_mode {self.gain_mode!r}")
        if self.gain_mode == "fixed":
            if self.gain is None or self.gain <= 0:
                raise ValueError("fixed gain_mode requires gain > 0")

    def with_lengths(self, l_ac_km: float, l_bc_km: float) -> "Scenario":
        return replace(
            self,
            channel_a=replace(self.channel_a, length_km=l_ac_km),
            channel_b=replace(self.channel_b, length_km=l_bc_km),
        )

    def resolved_gain(self) -> float:
        return self.gain if self.gain_mode == "fixed" else optimal_gain(self)


def optimal_gain(scenario: Scenario) -> float:
    """Displacement gain minimizing the equivalent excess noise."""
    eta_b = scenario.channel_b.transmittance
    if scenario.v_b <= 1.0:
        raise ValueError("no Bob modulation (v_b = 1): displacement gain undefined")
    return np.sqrt(2.0 / eta_b) * np.sqrt((scenario.v_b - 1.0) / (scenario.v_b + 1.0))


def equivalent_excess_noise(scenario: Scenario, g: float | None = None) -> float:
    """Input-referred excess noise of the equivalent one-way channel.

    With g omitted (or gain_mode optimal) the minimized closed form
    eps_a + [eta_b (eps_b - 2) + 2] / eta_a is used; otherwise the general
    gain-dependent expression.
    """
    eta_a = scenario.channel_a.transmittance
    eta_b = scenario.channel_b.transmittance
    eps_a = scenario.channel_a.excess_noise
    eps_b = scenario.channel_b.excess_noise
    if g is None and scenario.gain_mode == "fixed":
        g = scenario.gain
    if g is None:
        return eps_a + (eta_b * (eps_b - 2.0) + 2.0) / eta_a
    if g <= 0:
        raise ValueError("gain must be > 0")
    return float(kernels.equivalent_noise_general(g, scenario.v_b, eta_a, eta_b, eps_a, eps_b))


def effective_transmittance(scenario: Scenario, g: float | None = None) -> float:
    """Transmittance of the equivalent one-way channel, T = eta_a g^2 / 2."""
    if g is None:
        g = scenario.resolved_gain()
    if g <= 0:
        raise ValueError("gain must be > 0")
    return scenario.channel_a.transmittance / 2.0 * g * g


def entangling_cloner_variance(eta: float, eps: float) -> float:
    """Variance of Eve's EPR pair realizing transmittance eta and noise eps."""
    if not 0.0 < eta < 1.0:
        if eta == 1.0 and eps > 0.0:
            raise ValueError("lossless channel cannot carry entangling-cloner noise")
        raise ValueError(f"transmittance {eta} outside (0, 1)")
    return 1.0 + eta * eps / (1.0 - eta)


def detector_noise(eta_d: float, v_el: float) -> float:
    """Input-referred homodyne detector noise (1 - eta_d)/eta_d + v_el/eta_d."""
    if eta_d <= 0 or eta_d > 1:
        raise ValueError(f"detector efficiency {eta_d} outside (0, 1]")
    if v_el < 0:
        raise ValueError("electronic noise must be >= 0")
    return (1.0 - eta_d) / eta_d + v_el / eta_d


def imperfect_excess_noise(scenario: Scenario, g: float | None = None) -> float:
    """Equivalent excess noise including the relay detector penalty."""
    chi_det = detector_noise(scenario.detector.efficiency, scenario.detector.electronic_noise)
    return equivalent_excess_noise(scenario, g) + 2.0 * chi_det / scenario.channel_a.transmittance


def _block_cm(v_a: float, t: float, eps: float) -> CovarianceMatrix:
    b = t * (v_a - 1.0) + 1.0 + t * eps
    c = np.sqrt(t * (v_a * v_a - 1.0))
    return CovarianceMatrix(np.block([[v_a * I2, c * SIGMA_Z], [c * SIGMA_Z, b * I2]]))


def compose_eb_analytic(scenario: Scenario, g: float | None = None) -> CovarianceMatrix:
    """Post-protocol covariance of (kept mode, displaced mode), closed form.

    Detector imperfections are not included here; this is the ideal-relay
    covariance that the explicit composition must reproduce.
    """
    if g is None:
        g = scenario.resolved_gain()
    t = effective_transmittance(scenario, g)
    eps = equivalent_excess_noise(scenario, g)
    return _block_cm(scenario.v_a, t, eps)


def compose_eb_simulated(scenario: Scenario, g: float | None = None) -> CovarianceMatrix:
    """Post-protocol covariance by explicit Gaussian composition.

    Chain: two EPR sources, entangling-cloner channels, the 50:50 relay
    beamsplitter C = (A'-B')/sqrt(2), D = (A'+B')/sqrt(2), and Bob's
    outcome-driven displacement B1x' = B1x + g Cx, B1p' = B1p + g Dp. The
    ensemble covariance over announced outcomes is the covariance of these
    linear quadrature combinations.
    """
    if g is None:
        g = scenario.resolved_gain()
    if g <= 0:
        raise ValueError("gain must be > 0")

    # modes: 0=A1, 1=A2, 2=B1, 3=B2, then cloner pairs as needed
    state = tensor(tms_state(scenario.v_a), tms_state(scenario.v_b))
    parts = [state]
    next_mode = 4
    cloners = {}
    for label, ch in (("a", scenario.channel_a), ("b", scenario.channel_b)):
        eta = ch.transmittance
        if eta < 1.0:
            w = entangling_cloner_variance(eta, ch.excess_noise)
            parts.append(tms_state(w))
            cloners[label] = next_mode  # injected arm; kept arm at next_mode + 1
            next_mode += 2
        elif ch.excess_noise > 0.0:
            warnings.warn(
                "lossless channel cannot carry cloner noise; treating excess noise as 0",
                stacklevel=2,
            )
    state = tensor(*parts) if len(parts) > 1 else state

    if "a" in cloners:
        state = apply_beamsplitter(state, cloners["a"], 1, scenario.channel_a.transmittance)
    if "b" in cloners:
        state = apply_beamsplitter(state, cloners["b"], 3, scenario.channel_b.transmittance)
    # relay: mode 1 -> C = (A'-B')/sqrt(2), mode 3 -> D = (A'+B')/sqrt(2)
    state = apply_beamsplitter(state, 1, 3, 0.5)

    dim = 2 * state.n_modes
    sel = np.zeros((4, dim))
    sel[0, 0] = 1.0                 # A1 x
    sel[1, 1] = 1.0                 # A1 p
    sel[2, 4] = 1.0                 # B1 x
    sel[2, 2] = g                   # + g Cx
    sel[3, 5] = 1.0                 # B1 p
    sel[3, 7] = g                   # + g Dp
    return CovarianceMatrix(sel @ state.cov.entries @ sel.T)

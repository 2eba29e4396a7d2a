"""Numpy implementation of the hot key-rate kernels.

Mirrors the API of the compiled extension `_kernels`; see `kernels` for the
backend selection. All inputs are block-form two-mode covariance parameters
(a, b, c) meaning [[a*I2, c*sigma_z], [c*sigma_z, b*I2]] in shot-noise units.
"""

import numpy as np

BACKEND = "python"


def g_entropy(nu):
    """Bosonic entropy g(nu) in bits; clamps nu to 1 within roundoff."""
    nu = np.maximum(np.asarray(nu, dtype=float), 1.0)
    ap = (nu + 1.0) / 2.0
    am = (nu - 1.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ap * np.log2(ap) - np.where(am > 0, am * np.log2(np.where(am > 0, am, 1.0)), 0.0)
    return out if out.ndim else float(out)


def block_symplectic_eigenvalues(a, b, c):
    """(nu1, nu2) of the two-mode block covariance, nu1 >= nu2."""
    delta = a * a + b * b - 2.0 * c * c
    det = (a * b - c * c) ** 2
    disc = np.sqrt(np.maximum(delta * delta - 4.0 * det, 0.0))
    nu1 = np.sqrt((delta + disc) / 2.0)
    nu2 = np.sqrt(np.maximum((delta - disc) / 2.0, 0.0))
    return nu1, nu2


def block_mutual_information(a, b, c):
    """Two-quadrature Gaussian mutual information for dual heterodyne, bits."""
    return np.log2((a + 1.0) / (a + 1.0 - c * c / (b + 1.0)))


def block_holevo_reverse(a, b, c):
    """Holevo bound on Eve's information about mode-B heterodyne data, bits."""
    nu1, nu2 = block_symplectic_eigenvalues(a, b, c)
    nu3 = a - c * c / (b + 1.0)
    return g_entropy(nu1) + g_entropy(nu2) - g_entropy(nu3)


def block_key_rate(a, b, c, beta):
    """Reverse-reconciliation key rate beta*I - chi in bits per use."""
    return beta * block_mutual_information(a, b, c) - block_holevo_reverse(a, b, c)


def equivalent_noise_general(g, v_b, eta_a, eta_b, eps_a, eps_b):
    """Input-referred excess noise of the reduced one-way channel at gain g."""
    chi_a = (1.0 - eta_a) / eta_a + eps_a
    chi_b = (1.0 - eta_b) / eta_b + eps_b
    mismatch = np.sqrt(2.0) / g * np.sqrt(v_b - 1.0) - np.sqrt(eta_b) * np.sqrt(v_b + 1.0)
    return 1.0 + (eta_b * (chi_b - 1.0) + eta_a * chi_a) / eta_a + mismatch * mismatch / eta_a


def scan_k_rates(ks, v_a, v_b, eta_a, eta_b, eps_a, eps_b, chi_det, beta):
    """Key rate at each amplification coefficient k of the data-processing step.

    k maps to the displacement gain via g = k / sqrt((v_b-1)/(v_b+1)).
    Detector imperfections enter as the additive penalty 2*chi_det/eta_a on
    the equivalent excess noise.
    """
    ks = np.asarray(ks, dtype=float)
    g = ks / np.sqrt((v_b - 1.0) / (v_b + 1.0))
    eps_eff = equivalent_noise_general(g, v_b, eta_a, eta_b, eps_a, eps_b) + 2.0 * chi_det / eta_a
    t = eta_a / 2.0 * g * g
    a = np.full_like(ks, float(v_a))
    b = t * (v_a - 1.0) + 1.0 + t * eps_eff
    c = np.sqrt(t * (v_a * v_a - 1.0))
    return block_key_rate(a, b, c, beta)

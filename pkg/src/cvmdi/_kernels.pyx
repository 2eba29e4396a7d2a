# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled key-rate kernels (hot path of the k-grid and distance sweeps).

API mirrors `_kernels_py`; scalar entry points accept floats, `scan_k_rates`
accepts a 1-D array of amplification coefficients.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, sqrt, fmax

cnp.import_array()

BACKEND = "cython"


cdef inline double _g(double nu) nogil:
    cdef double ap, am
    if nu < 1.0:
        nu = 1.0
    ap = (nu + 1.0) / 2.0
    am = (nu - 1.0) / 2.0
    if am <= 0.0:
        return 0.0
    return ap * log2(ap) - am * log2(am)


cdef inline double _mi(double a, double b, double c) nogil:
    return log2((a + 1.0) / (a + 1.0 - c * c / (b + 1.0)))


cdef inline double _holevo(double a, double b, double c) nogil:
    cdef double delta, det, disc, nu1, nu2, nu3
    delta = a * a + b * b - 2.0 * c * c
    det = (a * b - c * c) * (a * b - c * c)
    disc = sqrt(fmax(delta * delta - 4.0 * det, 0.0))
    nu1 = sqrt((delta + disc) / 2.0)
    nu2 = sqrt(fmax((delta - disc) / 2.0, 0.0))
    nu3 = a - c * c / (b + 1.0)
    return _g(nu1) + _g(nu2) - _g(nu3)


cdef inline double _eps_general(double g, double v_b, double eta_a, double eta_b,
                                double eps_a, double eps_b) nogil:
    cdef double chi_a = (1.0 - eta_a) / eta_a + eps_a
    cdef double chi_b = (1.0 - eta_b) / eta_b + eps_b
    cdef double mismatch = sqrt(2.0) / g * sqrt(v_b - 1.0) - sqrt(eta_b) * sqrt(v_b + 1.0)
    return 1.0 + (eta_b * (chi_b - 1.0) + eta_a * chi_a) / eta_a + mismatch * mismatch / eta_a


def g_entropy(double nu):
    return _g(nu)


def block_symplectic_eigenvalues(double a, double b, double c):
    cdef double delta = a * a + b * b - 2.0 * c * c
    cdef double det = (a * b - c * c) * (a * b - c * c)
    cdef double disc = sqrt(fmax(delta * delta - 4.0 * det, 0.0))
    return sqrt((delta + disc) / 2.0), sqrt(fmax((delta - disc) / 2.0, 0.0))


def block_mutual_information(double a, double b, double c):
    return _mi(a, b, c)


def block_holevo_reverse(double a, double b, double c):
    return _holevo(a, b, c)


def block_key_rate(double a, double b, double c, double beta):
    return beta * _mi(a, b, c) - _holevo(a, b, c)


def equivalent_noise_general(double g, double v_b, double eta_a, double eta_b,
                             double eps_a, double eps_b):
    return _eps_general(g, v_b, eta_a, eta_b, eps_a, eps_b)


def scan_k_rates(ks, double v_a, double v_b, double eta_a, double eta_b,
                 double eps_a, double eps_b, double chi_det, double beta):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] karr = np.ascontiguousarray(ks, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(karr)
    cdef Py_ssize_t i, n = karr.shape[0]
    cdef double scale = sqrt((v_b - 1.0) / (v_b + 1.0))
    cdef double g, eps_eff, t, a, b, c
    with nogil:
        for i in range(n):
            g = karr[i] / scale
            eps_eff = _eps_general(g, v_b, eta_a, eta_b, eps_a, eps_b) + 2.0 * chi_det / eta_a
            t = eta_a / 2.0 * g * g
            a = v_a
            b = t * (v_a - 1.0) + 1.0 + t * eps_eff
            c = sqrt(t * (v_a * v_a - 1.0))
            out[i] = beta * _mi(a, b, c) - _holevo(a, b, c)
    return out

"""Gaussian quadrature-state toolkit in shot-noise units (vacuum variance = 1).

Quadrature ordering is (x1, p1, x2, p2, ...) throughout. All objects are
immutable values and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PHYSICALITY_TOL = 1e-9

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
I2 = np.eye(2)


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty bound (some nu < 1 - tol)."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Direct sum of n copies of [[0, 1], [-1, 0]]."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric 2n x 2n real quadrature covariance matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0 or m.shape[0] == 0:
            raise ValueError(f"covariance matrix must be 2n x 2n, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("covariance matrix has non-finite entries")
        m = 0.5 * (m + m.T)  # enforce exact symmetry
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling mode i to mode j."""
        return self.entries[2 * i:2 * i + 2, 2 * j:2 * j + 2].copy()

    def reduced(self, modes) -> "CovarianceMatrix":
        """Covariance of the listed modes (partial trace over the rest)."""
        idx = _quad_indices(modes, self.n_modes)
        return CovarianceMatrix(self.entries[np.ix_(idx, idx)])

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        return symplectic_eigenvalues(self)[-1] >= 1.0 - tol


@dataclass(frozen=True)
class GaussianState:
    """First and second quadrature moments of an n-mode Gaussian state."""

    mean: np.ndarray
    cov: CovarianceMatrix

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float).copy()
        if mu.ndim != 1 or mu.size != 2 * self.cov.n_modes:
            raise ValueError(
                f"mean length {mu.size} does not match {self.cov.n_modes} modes"
            )
        mu.setflags(write=False)
        object.__setattr__(self, "mean", mu)

    @property
    def n_modes(self) -> int:
        return self.cov.n_modes


@dataclass(frozen=True)
class OutcomeDistribution:
    """Gaussian distribution of a measurement outcome.

    ``response`` maps (outcome - mean) to the shift of the remaining state's
    mean vector, so the conditional mean is ``state.mean + response @ dy``.
    """

    mean: np.ndarray
    cov: np.ndarray
    response: np.ndarray = field(repr=False, default=None)


def _quad_indices(modes, n_modes) -> np.ndarray:
    modes = np.atleast_1d(np.asarray(modes, dtype=int))
    if np.any(modes < 0) or np.any(modes >= n_modes):
        raise ValueError(f"mode index out of range for {n_modes}-mode state")
    return np.concatenate([[2 * m, 2 * m + 1] for m in modes])


def vacuum_state(n_modes: int) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), CovarianceMatrix(np.eye(2 * n_modes)))


def tms_state(v: float) -> GaussianState:
    """Two-mode squeezed vacuum with quadrature variance v per mode."""
    if v < 1.0:
        raise ValueError(f"unphysical squeezing variance {v} (must be >= 1)")
    c = np.sqrt(v * v - 1.0)
    cov = np.block([[v * I2, c * SIGMA_Z], [c * SIGMA_Z, v * I2]])
    return GaussianState(np.zeros(4), CovarianceMatrix(cov))


def thermal_state(v: float) -> GaussianState:
    if v < 1.0:
        raise ValueError(f"unphysical thermal variance {v}")
    return GaussianState(np.zeros(2), CovarianceMatrix(v * I2))


def tensor(*states: GaussianState) -> GaussianState:
    """Product state of the given states, modes concatenated in order."""
    mean = np.concatenate([s.mean for s in states])
    dim = mean.size
    cov = np.zeros((dim, dim))
    k = 0
    for s in states:
        d = 2 * s.n_modes
        cov[k:k + d, k:k + d] = s.cov.entries
        k += d
    return GaussianState(mean, CovarianceMatrix(cov))


def beamsplitter_matrix(n_modes: int, mode_i: int, mode_j: int, tau: float) -> np.ndarray:
    """Symplectic matrix of a beamsplitter on modes (i, j).

    Output convention: out_i = sqrt(tau) in_i - sqrt(1-tau) in_j,
    out_j = sqrt(1-tau) in_i + sqrt(tau) in_j. At tau = 1/2 this realizes
    C = (A - B)/sqrt(2), D = (A + B)/sqrt(2).
    """
    if mode_i == mode_j:
        raise ValueError("beamsplitter modes must differ")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"transmittance {tau} outside [0, 1]")
    _quad_indices([mode_i, mode_j], n_modes)
    t, r = np.sqrt(tau), np.sqrt(1.0 - tau)
    s = np.eye(2 * n_modes)
    for q in (0, 1):  # same action on x and p
        a, b = 2 * mode_i + q, 2 * mode_j + q
        s[a, a], s[a, b] = t, -r
        s[b, a], s[b, b] = r, t
    return s


def apply_symplectic(state: GaussianState, s: np.ndarray) -> GaussianState:
    return GaussianState(s @ state.mean, CovarianceMatrix(s @ state.cov.entries @ s.T))


def apply_beamsplitter(state: GaussianState, mode_i: int, mode_j: int, tau: float) -> GaussianState:
    return apply_symplectic(state, beamsplitter_matrix(state.n_modes, mode_i, mode_j, tau))


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    """Shift the first moments of one mode; second moments are untouched."""
    _quad_indices([mode], state.n_modes)
    mean = state.mean.copy()
    mean[2 * mode] += dx
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


def _split_measured(state: GaussianState, mode: int):
    n = state.n_modes
    rest = [m for m in range(n) if m != mode]
    ri = _quad_indices(rest, n)
    mi = _quad_indices([mode], n)
    g = state.cov.entries
    return (
        state.mean[ri], state.mean[mi],
        g[np.ix_(ri, ri)], g[np.ix_(ri, mi)], g[np.ix_(mi, mi)],
    )


def heterodyne_condition(state: GaussianState, mode: int):
    """Heterodyne the given mode; return (remaining state, outcome distribution).

    The outcome is modeled as y = (q_m + v)/sqrt(2) with v a fresh vacuum, so
    its covariance is (gamma_m + I)/2 and its mean is mean_m/sqrt(2). The
    conditional covariance of the remaining modes is outcome-independent. The
    remaining state's mean is the conditional mean at the mean outcome.
    """
    if state.n_modes < 2:
        raise ValueError("heterodyne conditioning needs at least 2 modes")
    mu_r, mu_m, g_rr, g_rm, g_mm = _split_measured(state, mode)
    m = g_mm + I2
    m_inv = np.linalg.inv(m)
    cov_cond = g_rr - g_rm @ m_inv @ g_rm.T
    # response to (y - y_mean): dmu = sqrt(2) sigma (gamma_m + I)^-1 dy
    response = np.sqrt(2.0) * g_rm @ m_inv
    outcome = OutcomeDistribution(mean=mu_m / np.sqrt(2.0), cov=0.5 * m, response=response)
    return GaussianState(mu_r, CovarianceMatrix(cov_cond)), outcome


def homodyne_condition(state: GaussianState, mode: int, quadrature: str):
    """Homodyne x or p of the given mode; rank-1 conditional update."""
    if state.n_modes < 2:
        raise ValueError("homodyne conditioning needs at least 2 modes")
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    q = 0 if quadrature == "x" else 1
    mu_r, mu_m, g_rr, g_rm, g_mm = _split_measured(state, mode)
    var = g_mm[q, q]
    s = g_rm[:, q]
    # Moore-Penrose inverse of the projected (rank-1) measured variance
    cov_cond = g_rr - np.outer(s, s) / var
    response = (s / var).reshape(-1, 1)
    outcome = OutcomeDistribution(
        mean=np.array([mu_m[q]]), cov=np.array([[var]]), response=response
    )
    return GaussianState(mu_r, CovarianceMatrix(cov_cond)), outcome


def symplectic_eigenvalues(cov: CovarianceMatrix) -> np.ndarray:
    """Symplectic spectrum |eig(i Omega gamma)|, descending, one per mode."""
    g = cov.entries
    omega = symplectic_form(cov.n_modes)
    ev = np.linalg.eigvals(1j * omega @ g)
    nus = np.sort(np.abs(ev))[::-1]
    # eigenvalues come in +/- pairs; keep one per mode
    return nus[::2].copy()


def entropy_g(nu: float) -> float:
    """Bosonic entropy function g(nu) in bits, g(1) = 0 by continuity."""
    if nu < 1.0 - PHYSICALITY_TOL:
        raise UnphysicalStateError(f"symplectic eigenvalue {nu} < 1")
    if nu - 1.0 < 1e-12:
        return 0.0
    a, b = (nu + 1.0) / 2.0, (nu - 1.0) / 2.0
    return a * np.log2(a) - b * np.log2(b)


def von_neumann_entropy(cov: CovarianceMatrix) -> float:
    """Sum of g over the symplectic spectrum, in bits."""
    return float(sum(entropy_g(nu) for nu in symplectic_eigenvalues(cov)))

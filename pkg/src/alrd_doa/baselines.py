"""Classical comparison estimators: Capon, MUSIC and LS-ESPRIT.

Each works on a sample covariance, optionally forward-backward averaged.
The model order K is given, not estimated.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .linalg import forward_backward_average, hermitian_eig, sample_covariance
from .signal_model import steering_matrix
from .spectrum import DEFAULT_GRID, Spectrum, angle_grid, find_peaks

COND_LIMIT = 1e12
LOAD_EPS = 1e-8
METHODS = ("capon", "music", "esprit")


@dataclass(frozen=True)
class BaselineConfig:
    num_sources: int
    use_fba: bool = True
    grid_start_deg: float = DEFAULT_GRID[0]
    grid_stop_deg: float = DEFAULT_GRID[1]
    grid_step_deg: float = DEFAULT_GRID[2]

    def grid(self):
        return angle_grid(self.grid_start_deg, self.grid_stop_deg, self.grid_step_deg)


def _matrix(R):
    return np.asarray(getattr(R, "matrix", R))


def diagonal_load(R):
    """Load ``R`` by ``1e-8 * trace / M`` when its condition number exceeds 1e12.

    Returns ``(R_loaded, loaded)``.
    """
    R = _matrix(R)
    m = R.shape[0]
    if np.linalg.cond(R) <= COND_LIMIT:
        return R, False
    load = LOAD_EPS * np.trace(R).real / m
    if not load > 0:
        raise SingularityError("covariance has zero trace; diagonal loading impossible")
    return R + load * np.eye(m), True


def capon_spectrum(R, geometry, config):
    """Minimum-variance power ``1 / (a^H R^-1 a)`` over the grid."""
    grid = config.grid()
    R_l, loaded = diagonal_load(R)
    m = R_l.shape[0]
    try:
        R_inv = np.linalg.inv(R_l)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("covariance is singular") from exc
    A = steering_matrix(geometry, grid)
    denom = np.einsum("mg,mg->g", A.conj(), R_inv @ A).real
    if np.any(~np.isfinite(denom)) or np.any(denom <= 0):
        raise SingularityError("Capon denominator not positive")
    diagnostics = [(float("nan"), "diagonal-loading")] if loaded else []
    ops = m**3 + grid.size * (m * m + m)
    return Spectrum(grid, 1.0 / denom, diagnostics=diagnostics, op_count=ops)


def music_spectrum(R, geometry, config):
    """MUSIC pseudospectrum ``1 / ||E_n^H a||^2`` with the noise subspace of size M - K."""
    R = _matrix(R)
    m = R.shape[0]
    k = config.num_sources
    if not 0 <= k < m:
        raise DomainError(f"need 0 <= K < M, got K={k}, M={m}")
    grid = config.grid()
    _, V = hermitian_eig(R)
    En = V[:, k:]
    A = steering_matrix(geometry, grid)
    proj = np.sum(np.abs(En.conj().T @ A) ** 2, axis=0)
    with np.errstate(divide="ignore"):
        power = np.where(proj > 0, 1.0 / proj, np.finfo(float).max)
    ops = m**3 + grid.size * m * (m - k)
    return Spectrum(grid, power, op_count=ops)


def esprit_estimate(R, geometry, num_sources, return_ops=False):
    """LS-ESPRIT with maximum-overlap subarrays; angles sorted ascending."""
    R = _matrix(R)
    m = R.shape[0]
    k = int(num_sources)
    if not 1 <= k < m:
        raise DomainError(f"need 1 <= K < M, got K={k}, M={m}")
    _, V = hermitian_eig(R)
    Es = V[:, :k]
    upper, lower = Es[:-1], Es[1:]
    if np.linalg.matrix_rank(upper) < k:
        raise SingularityError("upper subarray signal block is rank deficient")
    phi, *_ = np.linalg.lstsq(upper, lower, rcond=None)
    phases = np.angle(np.linalg.eigvals(phi))
    cosines = np.clip(-phases / (2.0 * np.pi * geometry.spacing_ratio), -1.0, 1.0)
    angles = np.sort(np.rad2deg(np.arccos(cosines)))
    if return_ops:
        return angles, m**3 + (m - 1) * k * k + k**3
    return angles


def prepare_covariance(batch, use_fba):
    R = sample_covariance(batch).matrix
    return forward_backward_average(R) if use_fba else R


def baseline_estimate(batch, geometry, config, method, return_ops=False):
    """Covariance, optional FBA, then the chosen method; returns K angles."""
    if method not in METHODS:
        raise DomainError(f"unknown baseline {method!r}; expected one of {METHODS}")
    R = prepare_covariance(batch, config.use_fba)
    if method == "esprit":
        angles, ops = esprit_estimate(R, geometry, config.num_sources, return_ops=True)
    else:
        spec = (capon_spectrum if method == "capon" else music_spectrum)(R, geometry, config)
        angles, ops = find_peaks(spec, config.num_sources), spec.op_count
    return (angles, ops) if return_ops else angles

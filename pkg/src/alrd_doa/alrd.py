"""ALRD-RLS: alternating low-rank decomposition with D independent basis vectors.

Each scanning angle gets its own recursion. The received vector is cut into D
segments (rows ``mu_d`` of its Hankel embedding); segment ``d`` is filtered by
basis vector ``s_d`` and the D outputs are combined by the auxiliary vector
``w``. Both are found by exponentially weighted least squares under the
distortionless constraint ``w^H a_bar = 1``, alternating one pass per
snapshot. The output power ``1 / (a_bar^H R_D^-1 a_bar)`` forms the spectrum.

The stepwise functions here (``alrd_init``, ``update_basis``, ``update_aux``,
``alrd_power``) are the reference path and operate on a single angle. The
grid scan runs the same recursion through :mod:`alrd_doa.kernels`.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import DomainError, SingularityError
from .linalg import rank1_inverse_update, segment_rows, selection_operator
from .signal_model import steering_matrix
from .spectrum import DEFAULT_GRID, Spectrum, angle_grid

WEIGHT_FLOOR = 1e-12
TINY = 1e-300


@dataclass(frozen=True)
class AlrdConfig:
    """Shared ALRD/MALRD settings.

    ``init_scale`` and ``aux_init_scale`` are the regularisers ``delta`` of the
    basis and auxiliary inverse matrices (initialised to ``delta**-1 * I``).
    With ``scale_to_data`` a scan multiplies both by the batch's mean
    per-sensor power, which makes the spectrum scale-equivariant; the
    stepwise functions always use them as given.
    """

    basis_len: int = 12
    rank: int = 5
    forget: float = 0.998
    init_scale: float = 30.0
    aux_init_scale: float = 0.1
    scale_to_data: bool = True
    grid_start_deg: float = DEFAULT_GRID[0]
    grid_stop_deg: float = DEFAULT_GRID[1]
    grid_step_deg: float = DEFAULT_GRID[2]

    def __post_init__(self):
        if self.basis_len < 1 or self.rank < 1:
            raise DomainError("basis_len and rank must be >= 1")
        if not 0.0 < self.forget <= 1.0:
            raise DomainError(f"forget must lie in (0, 1], got {self.forget}")
        if not (self.init_scale > 0 and self.aux_init_scale > 0):
            raise DomainError("init scales must be positive")

    def grid(self):
        return angle_grid(self.grid_start_deg, self.grid_stop_deg, self.grid_step_deg)

    def rows(self, num_sensors):
        return selection_operator(num_sensors, self.rank, self.basis_len)

    def absolute(self, data):
        """Copy with data-scaled regularisers made absolute for ``data``."""
        if not self.scale_to_data:
            return self
        data = np.asarray(getattr(data, "data", data))
        power = float(np.mean(np.abs(data) ** 2))
        if not power > 0:
            raise DomainError("cannot scale regularisers to an all-zero batch")
        return replace(
            self,
            init_scale=self.init_scale * power,
            aux_init_scale=self.aux_init_scale * power,
            scale_to_data=False,
        )


@dataclass
class AlrdState:
    """Recursion state of one scanning angle.

    ``cross_ledger[d, j]`` holds the accumulated cross term between segments
    ``d`` and ``j``; the diagonal ``d == j`` is unused and stays zero.
    """

    rows: list
    basis: np.ndarray
    aux: np.ndarray
    inv_Rsd: np.ndarray
    cross_ledger: np.ndarray
    inv_RD: np.ndarray
    a_bar: np.ndarray
    steering: np.ndarray
    snapshots_seen: int = 0


def _embedding(h):
    return np.asarray(getattr(h, "data", h))


def _segments(hankel, rows):
    return _embedding(hankel)[rows]


def compute_a_bar(basis, steering_hankel, rows):
    """``a_bar[d] = (row mu_d of A_n) . conj(s_d)``."""
    Y = _segments(steering_hankel, rows)
    return np.einsum("dk,dk->d", Y, basis.conj())


def alrd_init(config, steering_hankel):
    A = _embedding(steering_hankel)
    if A.shape[1] != config.basis_len:
        raise DomainError("steering embedding width differs from basis_len")
    rows = config.rows(A.shape[0])
    D, I = config.rank, config.basis_len
    basis = np.zeros((D, I), dtype=complex)
    basis[:, 0] = 1.0
    return AlrdState(
        rows=rows,
        basis=basis,
        aux=np.full(D, 1.0 / D, dtype=complex),
        inv_Rsd=np.tile(np.eye(I, dtype=complex) / config.init_scale, (D, 1, 1)),
        cross_ledger=np.zeros((D, D, I), dtype=complex),
        inv_RD=np.eye(D, dtype=complex) / config.aux_init_scale,
        a_bar=compute_a_bar(basis, A, rows),
        steering=A[rows].copy(),
    )


def update_basis(state, config, snapshot_hankel, steering_hankel, d):
    """Advance basis vector ``d`` (0-based) by one snapshot, in place.

    Basis vectors ``j < d`` are expected to already hold this snapshot's
    value; ``j > d`` still hold the previous one.
    """
    D = config.rank
    if not 0 <= d < D:
        raise DomainError(f"basis index must lie in [0, {D}), got {d}")
    alpha = config.forget
    X = _segments(snapshot_hankel, state.rows)
    Y = _segments(steering_hankel, state.rows)
    w = state.aux
    wd = w[d]
    mag = abs(wd)
    if mag >= WEIGHT_FLOOR:
        u = mag * X[d]
        _, state.inv_Rsd[d] = rank1_inverse_update(state.inv_Rsd[d], u, u, alpha)
    else:
        state.inv_Rsd[d] = state.inv_Rsd[d] / alpha

    others = [j for j in range(D) if j != d]
    for j in others:
        t = np.vdot(X[j], state.basis[j])
        state.cross_ledger[d, j] = alpha * state.cross_ledger[d, j] + np.conj(wd) * w[j] * t * X[d]
    psum = state.cross_ledger[d, others].sum(axis=0) if others else np.zeros(config.basis_len, complex)

    Rinv = state.inv_Rsd[d]
    h = np.conj(wd) * Y[d]
    Rh = Rinv @ h
    Rp = Rinv @ psum
    den = np.vdot(h, Rh).real
    if not (abs(den) >= TINY and np.isfinite(den)):
        raise SingularityError("Lagrange multiplier denominator vanished")
    b = sum(w[j] * np.vdot(Y[j], state.basis[j]) for j in others)
    lam = (b - 1.0 - np.vdot(h, Rp)) / den
    state.basis[d] = -Rp - lam * Rh
    return state


def update_aux(state, config, snapshot_hankel):
    """Refresh ``a_bar`` from the current basis and solve for the auxiliary vector."""
    X = _segments(snapshot_hankel, state.rows)
    rbar = np.einsum("dk,dk->d", X, state.basis.conj())
    _, state.inv_RD = rank1_inverse_update(state.inv_RD, rbar, rbar, config.forget)
    state.a_bar = np.einsum("dk,dk->d", state.steering, state.basis.conj())
    Ra = state.inv_RD @ state.a_bar
    q = np.vdot(state.a_bar, Ra).real
    if not (q >= TINY and np.isfinite(q)):
        raise SingularityError("a_bar^H R_D^-1 a_bar vanished")
    state.aux = Ra / q
    state.snapshots_seen += 1
    return state


def solve_aux(inv_RD, a_bar):
    """Closed-form auxiliary vector ``R_D^-1 a / (a^H R_D^-1 a)``."""
    Ra = inv_RD @ a_bar
    q = np.vdot(a_bar, Ra)
    if abs(q) < TINY:
        raise SingularityError("a_bar^H R_D^-1 a_bar vanished")
    return Ra / q


def alrd_power(state):
    q = np.vdot(state.a_bar, state.inv_RD @ state.a_bar)
    if not np.isfinite(q) or abs(q) < TINY:
        raise SingularityError("output power is not finite")
    if abs(q.imag) > 1e-9 * abs(q):
        raise SingularityError("R_D^-1 lost Hermitian symmetry")
    return 1.0 / q.real


def alrd_step(state, config, snapshot_hankel, steering_hankel):
    """One full snapshot: D sequential basis updates then one auxiliary update."""
    for d in range(config.rank):
        update_basis(state, config, snapshot_hankel, steering_hankel, d)
    return update_aux(state, config, snapshot_hankel)


def prepare_segments(config, data, geometry, grid):
    """Snapshot segments (N, D, I) and steering segments (G, D, I) for a scan."""
    data = np.asarray(getattr(data, "data", data))
    if data.ndim != 2 or data.shape[1] < 1:
        raise DomainError("scan needs at least one snapshot")
    M = geometry.num_sensors
    if data.shape[0] != M:
        raise DomainError("batch rows differ from the number of sensors")
    rows = config.rows(M)
    X = segment_rows(data.T, rows, config.basis_len)
    Y = segment_rows(steering_matrix(geometry, grid).T, rows, config.basis_len)
    return X, Y


def _scan(method, config, batch, geometry, backend=None, grid=None):
    grid = config.grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("empty angle grid")
    X, Y = prepare_segments(config, batch, geometry, grid)
    cfg = config.absolute(batch)
    power, status, bops, aops = kernels.run_grid(
        method, X, Y, cfg.forget, cfg.init_scale, cfg.aux_init_scale, backend=backend
    )
    diagnostics = [
        (float(grid[g]), kernels.STATUS_TAGS[int(status[g])]) for g in np.flatnonzero(status)
    ]
    return Spectrum(
        angles_deg=grid,
        power=power,
        diagnostics=diagnostics,
        op_count=int(bops.sum() + aops.sum()),
        basis_ops=int(bops.sum()),
        aux_ops=int(aops.sum()),
    )


def alrd_scan(config, batch, geometry, backend=None, grid=None):
    """ALRD-RLS output power at every angle of ``config``'s grid.

    Angles whose recursion hits a singular denominator get power 0 and an
    entry in ``Spectrum.diagnostics``.
    """
    return _scan("alrd", config, batch, geometry, backend=backend, grid=grid)

"""MALRD-RLS: the ALRD recursion with a single basis vector shared by all segments.

Sharing the basis turns the D per-segment inverse updates into one, so the
per-snapshot basis cost grows with ``I**2`` instead of ``D * I**2``.
"""
from dataclasses import dataclass

import numpy as np

from .alrd import TINY, AlrdConfig, _embedding, _scan, _segments
from .errors import DomainError, SingularityError
from .linalg import rank1_inverse_update, selection_operator

__all__ = [
    "MalrdState",
    "malrd_init",
    "malrd_update_basis",
    "malrd_update_aux",
    "malrd_step",
    "malrd_power",
    "malrd_scan",
    "selection_operator",
]


@dataclass
class MalrdState:
    rows: list
    basis: np.ndarray
    aux: np.ndarray
    inv_Rs: np.ndarray
    inv_RD: np.ndarray
    a_bar: np.ndarray
    steering: np.ndarray
    snapshots_seen: int = 0


def malrd_init(config, steering_hankel):
    A = _embedding(steering_hankel)
    if A.shape[1] != config.basis_len:
        raise DomainError("steering embedding width differs from basis_len")
    rows = config.rows(A.shape[0])
    D, I = config.rank, config.basis_len
    s = np.zeros(I, dtype=complex)
    s[0] = 1.0
    Y = A[rows].copy()
    return MalrdState(
        rows=rows,
        basis=s,
        aux=np.full(D, 1.0 / D, dtype=complex),
        inv_Rs=np.eye(I, dtype=complex) / config.init_scale,
        inv_RD=np.eye(D, dtype=complex) / config.aux_init_scale,
        a_bar=Y @ s.conj(),
        steering=Y,
    )


def malrd_update_basis(state, config, snapshot_hankel, steering_hankel):
    """Track ``R_s^-1`` with the combined segment ``w`` and re-solve ``s``, in place."""
    X = _segments(snapshot_hankel, state.rows)
    Y = _segments(steering_hankel, state.rows)
    wc = state.aux.conj()
    u = wc @ X
    _, state.inv_Rs = rank1_inverse_update(state.inv_Rs, u, u, config.forget)
    h = wc @ Y
    Rh = state.inv_Rs @ h
    den = np.vdot(h, Rh).real
    if not (abs(den) >= TINY and np.isfinite(den)):
        raise SingularityError("basis normalisation denominator vanished")
    state.basis = Rh / den
    return state


def malrd_update_aux(state, config, snapshot_hankel):
    X = _segments(snapshot_hankel, state.rows)
    sc = state.basis.conj()
    rbar = X @ sc
    _, state.inv_RD = rank1_inverse_update(state.inv_RD, rbar, rbar, config.forget)
    state.a_bar = state.steering @ sc
    Ra = state.inv_RD @ state.a_bar
    q = np.vdot(state.a_bar, Ra).real
    if not (q >= TINY and np.isfinite(q)):
        raise SingularityError("a_bar^H R_D^-1 a_bar vanished")
    state.aux = Ra / q
    state.snapshots_seen += 1
    return state


def malrd_step(state, config, snapshot_hankel, steering_hankel):
    malrd_update_basis(state, config, snapshot_hankel, steering_hankel)
    return malrd_update_aux(state, config, snapshot_hankel)


def malrd_power(state):
    q = np.vdot(state.a_bar, state.inv_RD @ state.a_bar)
    if not np.isfinite(q) or abs(q) < TINY:
        raise SingularityError("output power is not finite")
    return 1.0 / q.real


def malrd_scan(config: AlrdConfig, batch, geometry, backend=None, grid=None):
    """MALRD-RLS output power at every angle of ``config``'s grid."""
    return _scan("malrd", config, batch, geometry, backend=backend, grid=grid)

"""Structured linear algebra shared by the estimators."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularityError


@dataclass(frozen=True)
class HankelEmbedding:
    source_len: int
    window: int
    data: np.ndarray


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    num_snapshots: int


def hankel_embed(x, window):
    """M x I zero-padded Hankel matrix with entry ``(m, j) = x[m + j]``.

    Entries with ``m + j > M - 1`` are exactly zero.
    """
    x = np.asarray(x)
    m = x.shape[0]
    if not 1 <= window <= m:
        raise DomainError(f"window must lie in [1, {m}], got {window}")
    padded = np.concatenate([x, np.zeros(window - 1, dtype=x.dtype)])
    idx = np.arange(m)[:, None] + np.arange(window)[None, :]
    return HankelEmbedding(source_len=m, window=window, data=padded[idx])


def segment_rows(x, rows, window):
    """Rows ``rows`` of ``hankel_embed(x, window)`` without forming the full matrix.

    Works on the last axis of ``x`` so a batch of vectors ``(..., M)`` maps to
    ``(..., len(rows), window)``.
    """
    x = np.asarray(x)
    m = x.shape[-1]
    pad = np.zeros(x.shape[:-1] + (window,), dtype=x.dtype)
    padded = np.concatenate([x, pad], axis=-1)
    idx = np.asarray(rows)[:, None] + np.arange(window)[None, :]
    if idx.size and idx[:, 0].max() >= m:
        raise DomainError("selection row beyond the embedding")
    return padded[..., idx]


def sample_covariance(batch):
    """``(1/N) sum_i r(i) r(i)^H`` for an M x N batch."""
    r = np.asarray(getattr(batch, "data", batch))
    if r.ndim != 2 or r.shape[1] < 1:
        raise DomainError("sample_covariance needs an M x N batch with N >= 1")
    n = r.shape[1]
    cov = (r @ r.conj().T) / n
    cov = 0.5 * (cov + cov.conj().T)
    return CovarianceEstimate(matrix=cov, num_snapshots=n)


def forward_backward_average(R):
    """Persymmetrised covariance ``(R + J conj(R) J) / 2``."""
    R = np.asarray(getattr(R, "matrix", R))
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DomainError(f"forward_backward_average needs a square matrix, got {R.shape}")
    return 0.5 * (R + R[::-1, ::-1].conj())


def hermitian_eig(R, tol=1e-10):
    """Eigenvalues in descending order and the matching orthonormal eigenvectors.

    Backed by LAPACK ``heevd`` through scipy.
    """
    R = np.asarray(getattr(R, "matrix", R))
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DomainError(f"hermitian_eig needs a square matrix, got {R.shape}")
    scale = max(np.linalg.norm(R), np.finfo(float).tiny)
    if np.linalg.norm(R - R.conj().T) > tol * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    w, v = scipy.linalg.eigh(0.5 * (R + R.conj().T))
    return w[::-1], v[:, ::-1]


def rank1_inverse_update(A_inv, u, v, forget):
    """Inversion-lemma update of ``A_inv`` for ``A_next = forget * A + u v^H``.

    Returns ``(gain, A_inv_next)`` where ``gain = A_inv u / (forget + v^H A_inv u)``.
    """
    if not 0.0 < forget <= 1.0:
        raise DomainError(f"forgetting factor must lie in (0, 1], got {forget}")
    A_inv = np.asarray(A_inv)
    u = np.asarray(u)
    v = np.asarray(v)
    Au = A_inv @ u
    denom = forget + np.vdot(v, Au)
    if abs(denom) < 1e-300:
        raise SingularityError("inversion-lemma denominator vanished")
    gain = Au / denom
    vA = v.conj() @ A_inv
    return gain, (A_inv - np.outer(gain, vA)) / forget


def selection_operator(M, D, I=None):
    """Rows ``mu_d = d * floor(M / D)`` (0-based ``d``) picked out of an M-row embedding.

    Applying the D x M selection matrix to ``X`` is ``X[selection_operator(M, D)]``.
    """
    if int(M) != M or int(D) != D or M < 1 or not 1 <= D <= M:
        raise DomainError(f"need 1 <= D <= M, got M={M}, D={D}")
    if I is not None and not 1 <= I <= M:
        raise DomainError(f"basis length must lie in [1, {M}], got {I}")
    step = M // D
    return [d * step for d in range(D)]

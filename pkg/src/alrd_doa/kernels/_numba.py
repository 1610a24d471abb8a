"""Compiled per-angle scan kernels.

Every kernel returns ``(power, status, basis_ops, aux_ops)`` per grid angle.
Operation counts are complex multiply-accumulates tallied as the loops run.
"""
import numpy as np

from .._jit import njit, prange

OK, BASIS_SINGULAR, AUX_SINGULAR = 0, 1, 2
TINY = 1e-300
WEIGHT_FLOOR = 1e-12


@njit(cache=True)
def _rank1_update(Ainv, u, alpha, Au, vA):
    n = u.shape[0]
    den = alpha + 0j
    for r in range(n):
        acc = 0j
        for c in range(n):
            acc += Ainv[r, c] * u[c]
        Au[r] = acc
        den += np.conj(u[r]) * acc
    for c in range(n):
        acc = 0j
        for r in range(n):
            acc += np.conj(u[r]) * Ainv[r, c]
        vA[c] = acc
    if not abs(den) >= TINY:
        return False
    inv_alpha = 1.0 / alpha
    for r in range(n):
        g = Au[r] / den
        for c in range(n):
            Ainv[r, c] = (Ainv[r, c] - g * vA[c]) * inv_alpha
    return True


@njit(cache=True)
def _matvec(A, x, out):
    n = x.shape[0]
    for r in range(n):
        acc = 0j
        for c in range(n):
            acc += A[r, c] * x[c]
        out[r] = acc


@njit(cache=True)
def _aux_step(RD, W, rbar, abar, alpha, bufD1, bufD2):
    # Returns (ok, a^H RD^-1 a); leaves the new auxiliary vector in W.
    D = W.shape[0]
    if not _rank1_update(RD, rbar, alpha, bufD1, bufD2):
        return False, 0.0
    _matvec(RD, abar, bufD1)
    q = 0.0
    for d in range(D):
        q += (np.conj(abar[d]) * bufD1[d]).real
    if not (q >= TINY and np.isfinite(q)):
        return False, q
    for d in range(D):
        W[d] = bufD1[d] / q
    return True, q


@njit(cache=True)
def alrd_angle(X, Y, alpha, delta, delta_aux):
    """ALRD-RLS recursion for one scanning angle.

    ``X`` is (N, D, I): the selected Hankel rows of every snapshot.
    ``Y`` is (D, I): the same rows of the steering-vector embedding.
    """
    N, D, I = X.shape
    S = np.zeros((D, I), dtype=np.complex128)
    W = np.full(D, 1.0 / D + 0j)
    Rsd = np.zeros((D, I, I), dtype=np.complex128)
    P = np.zeros((D, D, I), dtype=np.complex128)
    RD = np.zeros((D, D), dtype=np.complex128)
    T = np.zeros(D, dtype=np.complex128)
    Z = np.zeros(D, dtype=np.complex128)
    for d in range(D):
        S[d, 0] = 1.0
        Z[d] = np.conj(Y[d, 0])
        RD[d, d] = 1.0 / delta_aux
        for k in range(I):
            Rsd[d, k, k] = 1.0 / delta
    u = np.empty(I, dtype=np.complex128)
    h = np.empty(I, dtype=np.complex128)
    psum = np.empty(I, dtype=np.complex128)
    Rh = np.empty(I, dtype=np.complex128)
    Rp = np.empty(I, dtype=np.complex128)
    bufI = np.empty(I, dtype=np.complex128)
    rbar = np.empty(D, dtype=np.complex128)
    abar = np.empty(D, dtype=np.complex128)
    bufD1 = np.empty(D, dtype=np.complex128)
    bufD2 = np.empty(D, dtype=np.complex128)
    basis_ops = 0
    aux_ops = 0
    q = 0.0

    for i in range(N):
        x = X[i]
        for j in range(D):
            acc = 0j
            for k in range(I):
                acc += np.conj(x[j, k]) * S[j, k]
            T[j] = acc
        basis_ops += D * I

        for d in range(D):
            wd = W[d]
            mag = abs(wd)
            if mag >= WEIGHT_FLOOR:
                for k in range(I):
                    u[k] = mag * x[d, k]
                if not _rank1_update(Rsd[d], u, alpha, bufI, Rh):
                    return 0.0, BASIS_SINGULAR, basis_ops, aux_ops
                basis_ops += 3 * I * I + 2 * I
            else:
                for r in range(I):
                    for c in range(I):
                        Rsd[d, r, c] /= alpha
                basis_ops += I * I

            for k in range(I):
                psum[k] = 0j
            b = 0j
            for j in range(D):
                if j == d:
                    continue
                coef = np.conj(wd) * W[j] * T[j]
                for k in range(I):
                    P[d, j, k] = alpha * P[d, j, k] + coef * x[d, k]
                    psum[k] += P[d, j, k]
                b += W[j] * Z[j]
                basis_ops += 2 * I

            for k in range(I):
                h[k] = np.conj(wd) * Y[d, k]
            _matvec(Rsd[d], h, Rh)
            _matvec(Rsd[d], psum, Rp)
            den = 0.0
            hRp = 0j
            for k in range(I):
                den += (np.conj(h[k]) * Rh[k]).real
                hRp += np.conj(h[k]) * Rp[k]
            basis_ops += 2 * I * I + 3 * I
            if not (abs(den) >= TINY and np.isfinite(den)):
                return 0.0, BASIS_SINGULAR, basis_ops, aux_ops
            lam = (b - 1.0 - hRp) / den
            tn = 0j
            zn = 0j
            for k in range(I):
                S[d, k] = -Rp[k] - lam * Rh[k]
                tn += np.conj(x[d, k]) * S[d, k]
                zn += np.conj(Y[d, k]) * S[d, k]
            T[d] = tn
            Z[d] = zn
            basis_ops += 3 * I

        for d in range(D):
            rbar[d] = np.conj(T[d])
            abar[d] = np.conj(Z[d])
        ok, q = _aux_step(RD, W, rbar, abar, alpha, bufD1, bufD2)
        aux_ops += 4 * D * D + 3 * D
        if not ok:
            return 0.0, AUX_SINGULAR, basis_ops, aux_ops

    return 1.0 / q, OK, basis_ops, aux_ops


@njit(cache=True)
def malrd_angle(X, Y, alpha, delta, delta_aux):
    """MALRD-RLS recursion for one scanning angle (one shared basis vector)."""
    N, D, I = X.shape
    s = np.zeros(I, dtype=np.complex128)
    s[0] = 1.0
    W = np.full(D, 1.0 / D + 0j)
    Rs = np.zeros((I, I), dtype=np.complex128)
    for k in range(I):
        Rs[k, k] = 1.0 / delta
    RD = np.zeros((D, D), dtype=np.complex128)
    for d in range(D):
        RD[d, d] = 1.0 / delta_aux
    w = np.empty(I, dtype=np.complex128)
    h = np.empty(I, dtype=np.complex128)
    Rh = np.empty(I, dtype=np.complex128)
    bufI = np.empty(I, dtype=np.complex128)
    rbar = np.empty(D, dtype=np.complex128)
    abar = np.empty(D, dtype=np.complex128)
    bufD1 = np.empty(D, dtype=np.complex128)
    bufD2 = np.empty(D, dtype=np.complex128)
    basis_ops = 0
    aux_ops = 0
    q = 0.0

    for i in range(N):
        x = X[i]
        for k in range(I):
            accw = 0j
            acch = 0j
            for d in range(D):
                cw = np.conj(W[d])
                accw += cw * x[d, k]
                acch += cw * Y[d, k]
            w[k] = accw
            h[k] = acch
        if not _rank1_update(Rs, w, alpha, bufI, Rh):
            return 0.0, BASIS_SINGULAR, basis_ops, aux_ops
        _matvec(Rs, h, Rh)
        den = 0.0
        for k in range(I):
            den += (np.conj(h[k]) * Rh[k]).real
        basis_ops += 2 * D * I + 4 * I * I + 2 * I
        if not (abs(den) >= TINY and np.isfinite(den)):
            return 0.0, BASIS_SINGULAR, basis_ops, aux_ops
        for k in range(I):
            s[k] = Rh[k] / den
        basis_ops += I

        for d in range(D):
            tr = 0j
            ta = 0j
            for k in range(I):
                cs = np.conj(s[k])
                tr += x[d, k] * cs
                ta += Y[d, k] * cs
            rbar[d] = tr
            abar[d] = ta
        ok, q = _aux_step(RD, W, rbar, abar, alpha, bufD1, bufD2)
        aux_ops += 2 * D * I + 4 * D * D + 3 * D
        if not ok:
            return 0.0, AUX_SINGULAR, basis_ops, aux_ops

    return 1.0 / q, OK, basis_ops, aux_ops


@njit(cache=True, parallel=True)
def alrd_grid(X, Ygrid, alpha, delta, delta_aux):
    G = Ygrid.shape[0]
    power = np.zeros(G)
    status = np.zeros(G, dtype=np.int64)
    bops = np.zeros(G, dtype=np.int64)
    aops = np.zeros(G, dtype=np.int64)
    for g in prange(G):
        p, st, b, a = alrd_angle(X, Ygrid[g], alpha, delta, delta_aux)
        power[g] = p
        status[g] = st
        bops[g] = b
        aops[g] = a
    return power, status, bops, aops


@njit(cache=True, parallel=True)
def malrd_grid(X, Ygrid, alpha, delta, delta_aux):
    G = Ygrid.shape[0]
    power = np.zeros(G)
    status = np.zeros(G, dtype=np.int64)
    bops = np.zeros(G, dtype=np.int64)
    aops = np.zeros(G, dtype=np.int64)
    for g in prange(G):
        p, st, b, a = malrd_angle(X, Ygrid[g], alpha, delta, delta_aux)
        power[g] = p
        status[g] = st
        bops[g] = b
        aops[g] = a
    return power, status, bops, aops

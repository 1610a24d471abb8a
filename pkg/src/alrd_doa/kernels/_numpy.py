"""Pure-numpy scan kernels, vectorised across the angle grid.

They follow the compiled kernels step for step (same update order, same
operation tally) so either backend can stand in for the other. Angles that
hit a singular denominator are frozen and reported through ``status``.
"""
import numpy as np

from ._numba import AUX_SINGULAR, BASIS_SINGULAR, OK, TINY, WEIGHT_FLOOR


def _rank1_update(Ainv, u, alpha, active):
    # Ainv: (G, n, n), u: (G, n); updates rows where ``active`` in place.
    Au = np.einsum("gij,gj->gi", Ainv, u)
    den = alpha + np.einsum("gi,gi->g", u.conj(), Au)
    vA = np.einsum("gi,gij->gj", u.conj(), Ainv)
    good = active & (np.abs(den) >= TINY)
    den = np.where(good, den, 1.0)
    nxt = (Ainv - (Au / den[:, None])[:, :, None] * vA[:, None, :]) / alpha
    Ainv[good] = nxt[good]
    return good


def _aux_step(RD, W, rbar, abar, alpha, status):
    active = status == OK
    good = _rank1_update(RD, rbar, alpha, active)
    Ra = np.einsum("gij,gj->gi", RD, abar)
    q = np.einsum("gi,gi->g", abar.conj(), Ra).real
    good &= np.isfinite(q) & (q >= TINY)
    status[active & ~good] = AUX_SINGULAR
    W[good] = Ra[good] / q[good][:, None]
    return q


def alrd_grid(X, Ygrid, alpha, delta, delta_aux):
    N, D, I = X.shape
    G = Ygrid.shape[0]
    S = np.zeros((G, D, I), dtype=complex)
    S[:, :, 0] = 1.0
    W = np.full((G, D), 1.0 / D, dtype=complex)
    Rsd = np.zeros((G, D, I, I), dtype=complex)
    Rsd[:, :, np.arange(I), np.arange(I)] = 1.0 / delta
    P = np.zeros((G, D, D, I), dtype=complex)
    RD = np.zeros((G, D, D), dtype=complex)
    RD[:, np.arange(D), np.arange(D)] = 1.0 / delta_aux
    Z = Ygrid[:, :, 0].conj().copy()
    status = np.zeros(G, dtype=np.int64)
    q = np.zeros(G)
    basis_ops = 0
    aux_ops = 0

    for i in range(N):
        x = X[i]
        T = np.einsum("dk,gdk->gd", x.conj(), S)
        basis_ops += D * I
        for d in range(D):
            active = status == OK
            wd = W[:, d]
            mag = np.abs(wd)
            big = mag >= WEIGHT_FLOOR
            u = mag[:, None] * x[d][None, :]
            Rd = Rsd[:, d]
            good = _rank1_update(Rd, u, alpha, active & big)
            Rd[active & ~big] /= alpha
            status[active & big & ~good] = BASIS_SINGULAR
            Rsd[:, d] = Rd
            # per-angle tallies are identical unless the weight floor trips
            basis_ops += 3 * I * I + 2 * I

            others = [j for j in range(D) if j != d]
            psum = np.zeros((G, I), dtype=complex)
            b = np.zeros(G, dtype=complex)
            for j in others:
                coef = wd.conj() * W[:, j] * T[:, j]
                P[:, d, j] = alpha * P[:, d, j] + coef[:, None] * x[d][None, :]
                psum += P[:, d, j]
                b += W[:, j] * Z[:, j]
                basis_ops += 2 * I

            h = wd.conj()[:, None] * Ygrid[:, d]
            Rh = np.einsum("gij,gj->gi", Rd, h)
            Rp = np.einsum("gij,gj->gi", Rd, psum)
            den = np.einsum("gi,gi->g", h.conj(), Rh).real
            hRp = np.einsum("gi,gi->g", h.conj(), Rp)
            basis_ops += 2 * I * I + 3 * I
            ok = status == OK
            sing = ok & ~(np.isfinite(den) & (np.abs(den) >= TINY))
            status[sing] = BASIS_SINGULAR
            ok &= ~sing
            lam = (b - 1.0 - hRp) / np.where(ok, den, 1.0)
            s_new = -Rp - lam[:, None] * Rh
            S[ok, d] = s_new[ok]
            T[:, d] = np.einsum("k,gk->g", x[d].conj(), S[:, d])
            Z[:, d] = np.einsum("gk,gk->g", Ygrid[:, d].conj(), S[:, d])
            basis_ops += 3 * I

        q = _aux_step(RD, W, T.conj(), Z.conj(), alpha, status)
        aux_ops += 4 * D * D + 3 * D

    power = np.where(status == OK, 1.0 / np.where(status == OK, q, 1.0), 0.0)
    ops = np.full(G, basis_ops, dtype=np.int64), np.full(G, aux_ops, dtype=np.int64)
    return power, status, ops[0], ops[1]


def malrd_grid(X, Ygrid, alpha, delta, delta_aux):
    N, D, I = X.shape
    G = Ygrid.shape[0]
    s = np.zeros((G, I), dtype=complex)
    s[:, 0] = 1.0
    W = np.full((G, D), 1.0 / D, dtype=complex)
    Rs = np.zeros((G, I, I), dtype=complex)
    Rs[:, np.arange(I), np.arange(I)] = 1.0 / delta
    RD = np.zeros((G, D, D), dtype=complex)
    RD[:, np.arange(D), np.arange(D)] = 1.0 / delta_aux
    status = np.zeros(G, dtype=np.int64)
    q = np.zeros(G)
    basis_ops = 0
    aux_ops = 0

    for i in range(N):
        x = X[i]
        w = np.einsum("gd,dk->gk", W.conj(), x)
        h = np.einsum("gd,gdk->gk", W.conj(), Ygrid)
        active = status == OK
        good = _rank1_update(Rs, w, alpha, active)
        status[active & ~good] = BASIS_SINGULAR
        Rh = np.einsum("gij,gj->gi", Rs, h)
        den = np.einsum("gi,gi->g", h.conj(), Rh).real
        basis_ops += 2 * D * I + 4 * I * I + 2 * I
        ok = status == OK
        sing = ok & ~(np.isfinite(den) & (np.abs(den) >= TINY))
        status[sing] = BASIS_SINGULAR
        ok &= ~sing
        s[ok] = Rh[ok] / den[ok][:, None]
        basis_ops += I

        rbar = np.einsum("dk,gk->gd", x, s.conj())
        abar = np.einsum("gdk,gk->gd", Ygrid, s.conj())
        q = _aux_step(RD, W, rbar, abar, alpha, status)
        aux_ops += 2 * D * I + 4 * D * D + 3 * D

    power = np.where(status == OK, 1.0 / np.where(status == OK, q, 1.0), 0.0)
    return power, status, np.full(G, basis_ops, dtype=np.int64), np.full(G, aux_ops, dtype=np.int64)

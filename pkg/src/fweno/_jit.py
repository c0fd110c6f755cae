"""Compiled kernels used by the solver and the benchmarks.

Table coefficients travel as ``tab = (d, c, b, perm, beta, gamma)`` and weight
parameters as ``vp = (kind, s, s1, s2, eps)`` with kind 0 = JS, 1 = YC,
2 = FWENO.  Line functions return ``(status, location, reconstructions)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

KIND_CODES = {"js": 0, "yc": 1, "fweno": 2}
SPLIT_CODES = {"glf": 0, "llf": 1, "dm": 2}
MODEL_ADVECTION, MODEL_BURGERS = 0, 1

OK, BAD_STATE, NONFINITE = 0, 1, 2


@njit(cache=True)
def scratch_rows(r):
    return 5 * r + 4


@njit(cache=True)
def ipow(x, n):
    y = x
    for _ in range(n - 1):
        y = y * x
    return y


@njit(cache=True)
def weno_rec(v, start, step, r, tab, vp, w):
    """Reconstruction at x_{1/2} from ``v[start + step*k]``, k = 0..2r-2.

    ``w`` is scratch space of length at least ``7r``.
    """
    d, c, b, perm, beta, gam = tab
    kind, s, s1, s2, eps = vp
    n = 2 * r - 1
    P = n
    IND = n + r
    A = n + 2 * r
    TH = n + 3 * r
    for k in range(n):
        w[k] = v[start + step * k]
    for i in range(r):
        acc = d[i, 0] * w[i]
        for j in range(1, r):
            acc += d[i, j] * w[i + j]
        w[P + i] = acc
    if kind == 2:
        for j in range(1, n):
            df = w[j] - w[j - 1]
            w[TH + j] = df * df
        acc = w[TH + 1]
        for j in range(2, r):
            acc += w[TH + j]
        w[IND] = 0.0 if acc < 0.0 else acc
        for i in range(1, r):
            acc = acc - w[TH + i] + w[TH + i + r - 1]
            w[IND + i] = 0.0 if acc < 0.0 else acc
    else:
        for i in range(r):
            acc = 0.0
            for j in range(r - 1):
                lin = w[i + perm[i, j]]
                for k in range(j + 1, r):
                    lin += gam[i, j, k] * w[i + perm[i, k]]
                acc += beta[i, j] * (lin * lin)
            w[IND + i] = acc
    if kind == 0:
        for i in range(r):
            w[A + i] = c[i] / ipow(w[IND + i] + eps, s)
    else:
        acc = b[0] * w[0]
        for k in range(1, n):
            acc += b[k] * w[k]
        dr = ipow(acc * acc, s1)
        for i in range(r):
            w[A + i] = c[i] * ipow(1.0 + dr / (ipow(w[IND + i], s1) + eps), s2)
    tot = w[A]
    for i in range(1, r):
        tot += w[A + i]
    inv = 1.0 / tot
    q = (w[A] * inv) * w[P]
    for i in range(1, r):
        q += (w[A + i] * inv) * w[P + i]
    return q


@njit(cache=True)
def weno_batch(v, base, ts, count, r, tab, vp, out, S):
    """``out[k]`` = reconstruction from ``v[base + k + ts*t]``, t = 0..2r-2.

    Same arithmetic, in the same order, as :func:`weno_rec`, but laid out
    with the window index innermost so the loops vectorize.  ``S`` is scratch
    of shape (scratch_rows(r), >= count).
    """
    d, c, b, perm, beta, gam = tab
    kind, s, s1, s2, eps = vp
    n = 2 * r - 1
    P = 0
    IND = r
    A = 2 * r
    TH = 3 * r
    LIN = 3 * r + n
    DR = LIN + 1
    X = DR + 1
    Y = DR + 2
    for i in range(r):
        cf = d[i, 0]
        o = base + ts * i
        for k in range(count):
            S[P + i, k] = cf * v[o + k]
        for j in range(1, r):
            cf = d[i, j]
            o = base + ts * (i + j)
            for k in range(count):
                S[P + i, k] += cf * v[o + k]
    if kind == 2:
        for j in range(1, n):
            o1 = base + ts * j
            o0 = o1 - ts
            for k in range(count):
                df = v[o1 + k] - v[o0 + k]
                S[TH + j, k] = df * df
        for k in range(count):
            S[IND, k] = S[TH + 1, k]
        for j in range(2, r):
            for k in range(count):
                S[IND, k] += S[TH + j, k]
        for i in range(1, r):
            for k in range(count):
                S[IND + i, k] = S[IND + i - 1, k] - S[TH + i, k] + S[TH + i + r - 1, k]
        # clamp only after the recurrence has consumed the raw sums
        for i in range(r):
            for k in range(count):
                if S[IND + i, k] < 0.0:
                    S[IND + i, k] = 0.0
    else:
        for i in range(r):
            for k in range(count):
                S[IND + i, k] = 0.0
            for j in range(r - 1):
                o = base + ts * (i + perm[i, j])
                for k in range(count):
                    S[LIN, k] = v[o + k]
                for jj in range(j + 1, r):
                    gf = gam[i, j, jj]
                    o = base + ts * (i + perm[i, jj])
                    for k in range(count):
                        S[LIN, k] += gf * v[o + k]
                bf = beta[i, j]
                for k in range(count):
                    S[IND + i, k] += bf * (S[LIN, k] * S[LIN, k])
    if kind == 0:
        for i in range(r):
            for k in range(count):
                S[X, k] = S[IND + i, k] + eps
                S[Y, k] = S[X, k]
            for e in range(s - 1):
                for k in range(count):
                    S[Y, k] = S[Y, k] * S[X, k]
            ci = c[i]
            for k in range(count):
                S[A + i, k] = ci / S[Y, k]
    else:
        for k in range(count):
            S[DR, k] = b[0] * v[base + k]
        for t in range(1, n):
            bf = b[t]
            o = base + ts * t
            for k in range(count):
                S[DR, k] += bf * v[o + k]
        for k in range(count):
            S[X, k] = S[DR, k] * S[DR, k]
            S[DR, k] = S[X, k]
        for e in range(s1 - 1):
            for k in range(count):
                S[DR, k] = S[DR, k] * S[X, k]
        for i in range(r):
            for k in range(count):
                S[Y, k] = S[IND + i, k]
            for e in range(s1 - 1):
                for k in range(count):
                    S[Y, k] = S[Y, k] * S[IND + i, k]
            for k in range(count):
                S[X, k] = 1.0 + S[DR, k] / (S[Y, k] + eps)
                S[Y, k] = S[X, k]
            for e in range(s2 - 1):
                for k in range(count):
                    S[Y, k] = S[Y, k] * S[X, k]
            ci = c[i]
            for k in range(count):
                S[A + i, k] = ci * S[Y, k]
    for k in range(count):
        S[X, k] = S[A, k]
    for i in range(1, r):
        for k in range(count):
            S[X, k] += S[A + i, k]
    for k in range(count):
        S[X, k] = 1.0 / S[X, k]
        out[k] = (S[A, k] * S[X, k]) * S[P, k]
    for i in range(1, r):
        for k in range(count):
            out[k] += (S[A + i, k] * S[X, k]) * S[P + i, k]


@njit(cache=True)
def _first_nonfinite(x):
    for k in range(x.shape[0]):
        if not np.isfinite(x[k]):
            return k
    return -1


# ---------------------------------------------------------------- scalar laws

@njit(cache=True)
def _sflux(model, u):
    if model == MODEL_ADVECTION:
        return u
    return 0.5 * u * u


@njit(cache=True)
def _sspeed(model, u):
    if model == MODEL_ADVECTION:
        return 1.0
    return u


@njit(cache=True)
def scalar_line(u, g, N, model, split, alpha, r, tab, vp, fhat):
    """Interface fluxes ``fhat[k]`` between nodes ``g-1+k`` and ``g+k``, k = 0..N."""
    n_ext = u.shape[0]
    n = 2 * r - 1
    count = N + 1
    S = np.empty((scratch_rows(r), count))
    tmp = np.empty(count)
    f = np.empty(n_ext)
    for j in range(n_ext):
        f[j] = _sflux(model, u[j])
    if split == 0:
        fp = np.empty(n_ext)
        fm = np.empty(n_ext)
        for j in range(n_ext):
            fp[j] = 0.5 * (f[j] + alpha * u[j])
            fm[j] = 0.5 * (f[j] - alpha * u[j])
        weno_batch(fp, g - r, 1, count, r, tab, vp, fhat, S)
        weno_batch(fm, g - 1 + r, -1, count, r, tab, vp, tmp, S)
        for k in range(count):
            fhat[k] += tmp[k]
    else:
        # one column per interface, window entries strided by count
        WP = np.empty(n * count)
        WM = np.empty(n * count)
        use_p = np.ones(count, dtype=np.bool_)
        use_m = np.ones(count, dtype=np.bool_)
        for k in range(count):
            i = g - 1 + k
            if split == 2:
                lam_l = _sspeed(model, u[i])
                lam_r = _sspeed(model, u[i + 1])
                if lam_l > 0.0 and lam_r > 0.0:
                    use_m[k] = False
                    for t in range(n):
                        WP[t * count + k] = f[i - r + 1 + t]
                        WM[t * count + k] = f[i - r + 1 + t]
                    continue
                if lam_l < 0.0 and lam_r < 0.0:
                    use_p[k] = False
                    for t in range(n):
                        WP[t * count + k] = f[i + r - t]
                        WM[t * count + k] = f[i + r - t]
                    continue
                a = max(abs(lam_l), abs(lam_r))
            else:
                a = 0.0
                for j in range(i - r + 1, i + r + 1):
                    a = max(a, abs(_sspeed(model, u[j])))
            for t in range(n):
                jp = i - r + 1 + t
                jm = i + r - t
                WP[t * count + k] = 0.5 * (f[jp] + a * u[jp])
                WM[t * count + k] = 0.5 * (f[jm] - a * u[jm])
        weno_batch(WP, 0, count, count, r, tab, vp, fhat, S)
        weno_batch(WM, 0, count, count, r, tab, vp, tmp, S)
        for k in range(count):
            if not use_p[k]:
                fhat[k] = tmp[k]
            elif use_m[k]:
                fhat[k] += tmp[k]
    k = _first_nonfinite(fhat)
    if k >= 0:
        return NONFINITE, g - 1 + k, 2 * count
    return OK, -1, 2 * count


@njit(cache=True)
def scalar_line_rhs(u, g, N, h, model, split, alpha, r, tab, vp, out):
    fhat = np.empty(N + 1)
    status, loc, nrec = scalar_line(u, g, N, model, split, alpha, r, tab, vp, fhat)
    for j in range(N):
        out[j] = -(fhat[j + 1] - fhat[j]) / h
    return status, loc, nrec


# ------------------------------------------------------------------ Euler

@njit(cache=True)
def _primitive(U, j, m, gm1):
    rho = U[0, j]
    u = U[1, j] / rho
    v = U[2, j] / rho if m == 4 else 0.0
    p = gm1 * (U[m - 1, j] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


@njit(cache=True)
def euler_eigen(m, u, v, H, c, gm1, L, R, lam):
    """Left/right eigenvectors of the x-flux Jacobian with ``L @ R = I``.

    Fields are ordered u-c, u, (shear), u+c; ``v`` is the tangential
    velocity and is ignored when m == 3.
    """
    q = 0.5 * (u * u + v * v)
    b1 = gm1 / (c * c)
    b2 = b1 * q
    e = m - 1
    for a in range(m):
        for bb in range(m):
            L[a, bb] = 0.0
            R[a, bb] = 0.0
    lam[0] = u - c
    lam[e] = u + c
    lam[1] = u
    R[0, 0] = 1.0
    R[1, 0] = u - c
    R[e, 0] = H - u * c
    R[0, 1] = 1.0
    R[1, 1] = u
    R[e, 1] = q
    R[0, e] = 1.0
    R[1, e] = u + c
    R[e, e] = H + u * c
    L[0, 0] = 0.5 * (b2 + u / c)
    L[0, 1] = 0.5 * (-b1 * u - 1.0 / c)
    L[0, e] = 0.5 * b1
    L[1, 0] = 1.0 - b2
    L[1, 1] = b1 * u
    L[1, e] = -b1
    L[e, 0] = 0.5 * (b2 - u / c)
    L[e, 1] = 0.5 * (-b1 * u + 1.0 / c)
    L[e, e] = 0.5 * b1
    if m == 4:
        lam[2] = u
        R[2, 0] = v
        R[2, 1] = v
        R[2, 3] = v
        R[2, 2] = 1.0
        R[3, 2] = v
        L[0, 2] = -0.5 * b1 * v
        L[1, 2] = b1 * v
        L[3, 2] = -0.5 * b1 * v
        L[2, 0] = -v
        L[2, 2] = 1.0


@njit(cache=True)
def _project(Lt, lo, F, U, al, half, jbase, jstep, t, count, m, W, pf):
    """``W[pf, t-th window slot] = half * Lt[pf] . (F + al U)`` for every interface.

    ``Lt[pf, a, lo + k]`` is the left eigenvector row used at interface k and
    the window node for slot t at interface k is ``jbase + jstep * t + k``.
    """
    off = t * count
    j0 = jbase + jstep * t
    # 1D views let the interface loop vectorize
    w = W[pf, off:off + count]
    alr = al[pf]
    hr = half[pf]
    for k in range(count):
        w[k] = 0.0
    for a in range(m):
        La = Lt[pf, a, lo:lo + count]
        Fa = F[a, j0:j0 + count]
        Ua = U[a, j0:j0 + count]
        for k in range(count):
            w[k] += La[k] * (Fa[k] + alr[k] * Ua[k])
    for k in range(count):
        w[k] *= hr[k]


@njit(cache=True)
def euler_line(U, g, N, gamma, split, alpha, r, tab, vp, fhat):
    """Characteristic-wise interface fluxes for one line of Euler states.

    ``U`` has shape (m, N + 2g) with the normal momentum in row 1.  Arrays
    indexed by interface keep the interface innermost so the projection
    loops run over contiguous memory.
    """
    m = U.shape[0]
    n_ext = U.shape[1]
    n = 2 * r - 1
    count = N + 1
    gm1 = gamma - 1.0
    F = np.empty((m, n_ext))
    lam_n = np.empty((m, n_ext))
    L = np.empty((m, m))
    R = np.empty((m, m))
    lam = np.empty(m)
    dm = split == 2
    # eigenvectors by (field, component, node) for DM, (.., interface) otherwise
    ncol = n_ext if dm else count
    Lt = np.empty((m, m, ncol))
    Rt = np.empty((m, m, ncol))
    for j in range(n_ext):
        rho, u, v, p = _primitive(U, j, m, gm1)
        if not (rho > 0.0 and p > 0.0 and np.isfinite(rho + p + u + v)):
            return BAD_STATE, j, 0
        E = U[m - 1, j]
        F[0, j] = rho * u
        F[1, j] = rho * u * u + p
        if m == 4:
            F[2, j] = rho * u * v
        F[m - 1, j] = u * (E + p)
        c = np.sqrt(gamma * p / rho)
        H = (E + p) / rho
        euler_eigen(m, u, v, H, c, gm1, L, R, lam)
        for pf in range(m):
            lam_n[pf, j] = lam[pf]
        if dm:
            for pf in range(m):
                for a in range(m):
                    Lt[pf, a, j] = L[pf, a]
                    Rt[a, pf, j] = R[a, pf]
    alp = np.empty((m, count))
    alm = np.empty((m, count))
    half = np.empty((m, count))
    use_p = np.ones((m, count), dtype=np.bool_)
    use_m = np.ones((m, count), dtype=np.bool_)
    for k in range(count):
        i = g - 1 + k
        if dm:
            for pf in range(m):
                lam_l = lam_n[pf, i]
                lam_r = lam_n[pf, i + 1]
                al = max(abs(lam_l), abs(lam_r))
                h2 = 0.5
                if lam_l > 0.0 and lam_r > 0.0:
                    use_m[pf, k] = False
                    al = 0.0
                    h2 = 1.0
                elif lam_l < 0.0 and lam_r < 0.0:
                    use_p[pf, k] = False
                    al = 0.0
                    h2 = 1.0
                alp[pf, k] = al
                alm[pf, k] = -al
                half[pf, k] = h2
        else:
            rl, ul, vl, pl = _primitive(U, i, m, gm1)
            rr, ur, vr, pr = _primitive(U, i + 1, m, gm1)
            sl = np.sqrt(rl)
            sr = np.sqrt(rr)
            hl = (U[m - 1, i] + pl) / rl
            hr = (U[m - 1, i + 1] + pr) / rr
            u = (sl * ul + sr * ur) / (sl + sr)
            v = (sl * vl + sr * vr) / (sl + sr)
            H = (sl * hl + sr * hr) / (sl + sr)
            c2 = gm1 * (H - 0.5 * (u * u + v * v))
            if not c2 > 0.0:
                return BAD_STATE, i, 0
            euler_eigen(m, u, v, H, np.sqrt(c2), gm1, L, R, lam)
            for pf in range(m):
                for a in range(m):
                    Lt[pf, a, k] = L[pf, a]
                    Rt[a, pf, k] = R[a, pf]
                if split == 0:
                    al = alpha
                else:
                    al = 0.0
                    for j in range(i - r + 1, i + r + 1):
                        al = max(al, abs(lam_n[pf, j]))
                alp[pf, k] = al
                alm[pf, k] = -al
                half[pf, k] = 0.5
    # plus side uses the eigenvectors at node i (DM) or the interface; minus at i+1
    lo_p = g - 1 if dm else 0
    lo_m = g if dm else 0
    WP = np.empty((m, n * count))
    WM = np.empty((m, n * count))
    for pf in range(m):
        for t in range(n):
            _project(Lt, lo_p, F, U, alp, half, g - r, 1, t, count, m, WP, pf)
            _project(Lt, lo_m, F, U, alm, half, g - 1 + r, -1, t, count, m, WM, pf)
    S = np.empty((scratch_rows(r), count))
    psi_p = np.empty((m, count))
    psi_m = np.empty((m, count))
    for pf in range(m):
        weno_batch(WP[pf], 0, count, count, r, tab, vp, psi_p[pf], S)
        weno_batch(WM[pf], 0, count, count, r, tab, vp, psi_m[pf], S)
    for a in range(m):
        fa = fhat[a]
        for k in range(count):
            fa[k] = 0.0
        for pf in range(m):
            pp = psi_p[pf]
            pm = psi_m[pf]
            up = use_p[pf]
            um = use_m[pf]
            rp = Rt[a, pf, lo_p:lo_p + count]
            rm = Rt[a, pf, lo_m:lo_m + count]
            for k in range(count):
                cp = pp[k] * rp[k] if up[k] else 0.0
                cm = pm[k] * rm[k] if um[k] else 0.0
                fa[k] += cp + cm
    for k in range(count):
        for a in range(m):
            if not np.isfinite(fhat[a, k]):
                return NONFINITE, g - 1 + k, 2 * m * count
    return OK, -1, 2 * m * count


@njit(cache=True)
def euler_line_rhs(U, g, N, h, gamma, split, alpha, r, tab, vp, out):
    """``out[:, j] = -(fhat[:, j+1] - fhat[:, j]) / h`` for one 1D line."""
    m = U.shape[0]
    fhat = np.empty((m, N + 1))
    status, loc, nrec = euler_line(U, g, N, gamma, split, alpha, r, tab, vp, fhat)
    for a in range(m):
        for j in range(N):
            out[a, j] = -(fhat[a, j + 1] - fhat[a, j]) / h
    return status, loc, nrec


@njit(cache=True, parallel=True)
def euler_rhs_2d(U, g, Nx, Ny, hx, hy, gamma, split, alpha_x, alpha_y, r, tab, vp, out,
                 status, loc, nrec):
    """Dimension-by-dimension RHS on an extended (4, Nx+2g, Ny+2g) array.

    ``status``/``loc``/``nrec`` have one slot per row (first Ny) and per
    column (next Nx) so each parallel line writes only its own entries.
    """
    for j in prange(Ny):
        line = np.ascontiguousarray(U[:, :, g + j])
        fhat = np.empty((4, Nx + 1))
        st, lc, nr = euler_line(line, g, Nx, gamma, split, alpha_x, r, tab, vp, fhat)
        status[j] = st
        loc[j] = lc
        nrec[j] = nr
        for a in range(4):
            for i in range(Nx):
                out[a, i, j] = -(fhat[a, i + 1] - fhat[a, i]) / hx
    for i in prange(Nx):
        line = np.empty((4, Ny + 2 * g))
        for jj in range(Ny + 2 * g):
            line[0, jj] = U[0, g + i, jj]
            line[1, jj] = U[2, g + i, jj]
            line[2, jj] = U[1, g + i, jj]
            line[3, jj] = U[3, g + i, jj]
        fhat = np.empty((4, Ny + 1))
        st, lc, nr = euler_line(line, g, Ny, gamma, split, alpha_y, r, tab, vp, fhat)
        status[Ny + i] = st
        loc[Ny + i] = lc
        nrec[Ny + i] = nr
        for j in range(Ny):
            out[0, i, j] -= (fhat[0, j + 1] - fhat[0, j]) / hy
            out[2, i, j] -= (fhat[1, j + 1] - fhat[1, j]) / hy
            out[1, i, j] -= (fhat[2, j + 1] - fhat[2, j]) / hy
            out[3, i, j] -= (fhat[3, j + 1] - fhat[3, j]) / hy


# ------------------------------------------------------------- benchmarks

@njit(cache=True)
def batch_fast_indicators(W, out):
    """Fast indicators for each row of ``W`` (one window per row)."""
    nw, n = W.shape
    r = (n + 1) // 2
    theta = np.empty(n)
    for t in range(nw):
        for j in range(1, n):
            df = W[t, j] - W[t, j - 1]
            theta[j] = df * df
        acc = theta[1]
        for j in range(2, r):
            acc += theta[j]
        out[t, 0] = 0.0 if acc < 0.0 else acc
        for i in range(1, r):
            acc = acc - theta[i] + theta[i + r - 1]
            out[t, i] = 0.0 if acc < 0.0 else acc


@njit(cache=True)
def batch_js_indicators(W, perm, beta, gam, out):
    """Jiang-Shu indicators for each row of ``W`` via the sum-of-squares factors."""
    nw, n = W.shape
    r = (n + 1) // 2
    for t in range(nw):
        for i in range(r):
            acc = 0.0
            for j in range(r - 1):
                lin = W[t, i + perm[i, j]]
                for k in range(j + 1, r):
                    lin += gam[i, j, k] * W[t, i + perm[i, k]]
                acc += beta[i, j] * (lin * lin)
            out[t, i] = acc


@njit(cache=True)
def batch_reconstruct(W, r, tab, vp, out):
    w = np.empty(7 * r)
    for t in range(W.shape[0]):
        out[t] = weno_rec(W[t], 0, 1, r, tab, vp, w)

"""Loop kernels for banded factorizations and bulge chasing.

Every kernel is plain Python over numpy arrays so that it runs unchanged
without numba. When numba is importable and ``SYMBAND_DISABLE_NUMBA`` is
unset (or ``0``), the kernels are compiled with ``numba.njit``.

Storage conventions
-------------------
Symmetric band ("lower storage"): ``ab[r, j] = A[j + r, j]`` for
``0 <= r < ab.shape[0]``. The number of stored diagonals may exceed the
logical bandwidth so that bulges have room to live.

General band (LAPACK layout): ``gb[u + i - j, j] = A[i, j]``.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FLAG = "SYMBAND_DISABLE_NUMBA"


def numba_enabled() -> bool:
    if os.environ.get(_FLAG, "0") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


_USE_NUMBA = numba_enabled()

if _USE_NUMBA:
    import numba

    def jit(fn):
        return numba.njit(cache=True)(fn)
else:

    def jit(fn):
        return fn


def py_func(kernel):
    """The uncompiled Python body of a kernel (identity when numba is off)."""
    return getattr(kernel, "py_func", kernel)


# ---------------------------------------------------------------------------
# symmetric band access


@jit
def _sget(ab, i, j):
    if i < j:
        i, j = j, i
    r = i - j
    if r >= ab.shape[0]:
        return 0.0
    return ab[r, j]


@jit
def _sset(ab, i, j, v):
    """Store v at (i, j); returns 1 if a nonzero value had no slot."""
    if i < j:
        i, j = j, i
    r = i - j
    if r >= ab.shape[0]:
        if v != 0.0:
            return 1
        return 0
    ab[r, j] = v
    return 0


@jit
def sym_rotate(ab, n, p, c, s):
    """Similarity A <- R A R^T with R = [[c, s], [-s, c]] in plane (p, p+1).

    Returns the number of nonzero values that fell outside the storage.
    """
    W = ab.shape[0] - 1
    q = p + 1
    lo = p - W
    if lo < 0:
        lo = 0
    hi = q + W
    if hi > n - 1:
        hi = n - 1
    bad = 0
    for t in range(lo, hi + 1):
        if t == p or t == q:
            continue
        x = _sget(ab, p, t)
        y = _sget(ab, q, t)
        if x == 0.0 and y == 0.0:
            continue
        bad += _sset(ab, p, t, c * x + s * y)
        bad += _sset(ab, q, t, -s * x + c * y)
    a = ab[0, p]
    b = ab[1, p]
    d = ab[0, q]
    cs = c * s
    ab[0, p] = c * c * a + 2.0 * cs * b + s * s * d
    ab[0, q] = s * s * a - 2.0 * cs * b + c * c * d
    ab[1, p] = (c * c - s * s) * b + cs * (d - a)
    return bad


# ---------------------------------------------------------------------------
# band -> tridiagonal (Schwarz-style Givens bulge chasing)


@jit
def band_to_tridiag_kernel(ab, n, b, log_p, log_c, log_s, logging):
    """Reduce the band in-place to tridiagonal form.

    ``ab`` must store at least b + 2 diagonals. Returns (rotation count,
    overflow count); a negative count signals the log was too small.
    Rotations are only recorded when ``logging`` is true.
    """
    cnt = 0
    bad = 0
    cap = log_p.shape[0]
    for d in range(b, 1, -1):
        for j in range(0, n - d):
            col = j
            row = j + d
            while row < n:
                y = ab[row - col, col]
                if y == 0.0:
                    break
                x = ab[row - 1 - col, col]
                h = math.hypot(x, y)
                c = x / h
                s = y / h
                bad += sym_rotate(ab, n, row - 1, c, s)
                ab[row - col, col] = 0.0
                ab[row - 1 - col, col] = h
                if logging:
                    if cnt >= cap:
                        return -1, bad
                    log_p[cnt] = row - 1
                    log_c[cnt] = c
                    log_s[cnt] = s
                cnt += 1
                col = row - 1
                row = row + d
    return cnt, bad


@jit
def replay_rotations(y, log_p, log_c, log_s, cnt):
    """Y <- F_1 F_2 ... F_cnt Y with F_k = R_k^T acting on rows (p, p+1)."""
    m = y.shape[1]
    for k in range(cnt - 1, -1, -1):
        p = log_p[k]
        c = log_c[k]
        s = log_s[k]
        for t in range(m):
            a = y[p, t]
            b = y[p + 1, t]
            y[p, t] = c * a - s * b
            y[p + 1, t] = s * a + c * b


@jit
def replay_rotations_transpose(y, log_p, log_c, log_s, cnt):
    """Y <- F_cnt^T ... F_1^T Y (inverse of replay_rotations)."""
    m = y.shape[1]
    for k in range(cnt):
        p = log_p[k]
        c = log_c[k]
        s = log_s[k]
        for t in range(m):
            a = y[p, t]
            b = y[p + 1, t]
            y[p, t] = c * a + s * b
            y[p + 1, t] = -s * a + c * b


# ---------------------------------------------------------------------------
# symmetric tridiagonal QL with implicit Wilkinson shifts


@jit
def tql_kernel(d, e, zt, want, max_sweeps):
    """Eigenvalues of the tridiagonal (d, e) in-place in ``d``.

    ``e[i]`` couples i and i+1 (the last entry is ignored). When ``want`` is
    true, rows of ``zt`` are rotated so that row i ends as eigenvector i.
    Returns the number of sweeps or -1 on non-convergence.
    """
    n = d.shape[0]
    if n == 0:
        return 0
    e[n - 1] = 0.0
    eps = 2.220446049250313e-16
    m_rows = zt.shape[1]
    sweeps = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
                if want:
                    for k in range(m_rows):
                        f2 = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f2
                        zt[i, k] = c * zt[i, k] - s * f2
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return sweeps


# ---------------------------------------------------------------------------
# LDL^T without pivoting


@jit
def ldlt_kernel(ab, n, b, dvals, lb):
    """A = L D L^T for the symmetric band ``ab`` (lower storage, b+1 rows).

    ``lb[r, j] = L[j + r, j]`` for r = 1..b. Returns the first index with an
    exactly zero pivot, or -1.
    """
    for j in range(n):
        acc = ab[0, j]
        k0 = j - b
        if k0 < 0:
            k0 = 0
        for k in range(k0, j):
            ljk = lb[j - k, k]
            acc -= ljk * ljk * dvals[k]
        if acc == 0.0:
            return j
        dvals[j] = acc
        i1 = j + b
        if i1 > n - 1:
            i1 = n - 1
        for i in range(j + 1, i1 + 1):
            acc = ab[i - j, j]
            k0 = i - b
            if k0 < 0:
                k0 = 0
            for k in range(k0, j):
                acc -= lb[i - k, k] * lb[j - k, k] * dvals[k]
            lb[i - j, j] = acc / dvals[j]
    return -1


@jit
def ldlt_solve_kernel(lb, dvals, n, b, x):
    """Solve L D L^T y = x in place for a vector or matrix ``x`` (n x m)."""
    m = x.shape[1]
    for i in range(n):
        k0 = i - b
        if k0 < 0:
            k0 = 0
        for k in range(k0, i):
            l = lb[i - k, k]
            for t in range(m):
                x[i, t] -= l * x[k, t]
    for i in range(n):
        for t in range(m):
            x[i, t] /= dvals[i]
    for i in range(n - 1, -1, -1):
        k1 = i + b
        if k1 > n - 1:
            k1 = n - 1
        for k in range(i + 1, k1 + 1):
            l = lb[k - i, i]
            for t in range(m):
                x[i, t] -= l * x[k, t]


# ---------------------------------------------------------------------------
# split Cholesky B = S^T S


@jit
def split_cholesky_kernel(wb, n, b, m, sd):
    """Split Cholesky of the band ``wb`` (lower storage, overwritten).

    S is upper triangular in rows [0, m) and lower triangular in rows
    [m, n); ``sd`` holds S in general band layout with l = u = b.
    Returns the first failing pivot index, or -1.
    """
    for i in range(n - 1, m - 1, -1):
        piv = wb[0, i]
        if not piv > 0.0:
            return i
        sii = math.sqrt(piv)
        sd[b, i] = sii
        j0 = i - b
        if j0 < 0:
            j0 = 0
        for j in range(j0, i):
            sd[b + i - j, j] = wb[i - j, j] / sii
        for j1 in range(j0, i):
            s1 = sd[b + i - j1, j1]
            if s1 == 0.0:
                continue
            for j2 in range(j1, i):
                wb[j2 - j1, j1] -= s1 * sd[b + i - j2, j2]
    for i in range(m):
        piv = wb[0, i]
        if not piv > 0.0:
            return i
        sii = math.sqrt(piv)
        sd[b, i] = sii
        j1 = i + b
        if j1 > m - 1:
            j1 = m - 1
        for j in range(i + 1, j1 + 1):
            sd[b + i - j, j] = wb[j - i, i] / sii
        for ja in range(i + 1, j1 + 1):
            sa = sd[b + i - ja, ja]
            if sa == 0.0:
                continue
            for jb in range(ja, j1 + 1):
                wb[jb - ja, ja] -= sa * sd[b + i - jb, jb]
    return -1


# ---------------------------------------------------------------------------
# banded generalized -> standard reduction (split-Cholesky congruences)


@jit
def _log_rot(kind, idx, lc, ls, cnt, p, c, s):
    if cnt >= kind.shape[0]:
        return cnt + 1
    kind[cnt] = 0
    idx[cnt] = p
    lc[cnt] = c
    ls[cnt] = s
    return cnt + 1


@jit
def sbgst_kernel(ab, n, b, m, sd, kind, idx, lc, ls, gv, logging):
    """Congruence-reduce A to X^T A X with X = S^{-1} Q, keeping bandwidth b.

    ``ab`` is A in lower storage with at least 2b + 3 stored diagonals. The
    factor log records, in application order, rotations (kind 0, plane
    (idx, idx+1)) and elementary steps (kind 1; ``gv[i]`` holds the vector
    v over indices [i - b, i + b], offset by b). Returns (log length,
    overflow count); a log length above the capacity means the log was cut.
    """
    W = ab.shape[0] - 1
    cnt = 0
    bad = 0
    v = np.zeros(2 * b + 1)
    acol = np.zeros(2 * b + 1)
    # bottom rows: m..n-1, processed from the last one upwards
    for i in range(n - 1, m - 1, -1):
        sii = sd[b, i]
        for t in range(2 * b + 1):
            v[t] = 0.0
            acol[t] = 0.0
        j0 = i - b
        if j0 < 0:
            j0 = 0
        for j in range(j0, i):
            v[j - i + b] = -sd[b + i - j, j] / sii
        v[b] = 1.0 / sii - 1.0
        r1 = i + b
        if r1 > n - 1:
            r1 = n - 1
        for t in range(j0, r1 + 1):
            acol[t - i + b] = _sget(ab, t, i)
        aii = acol[b]
        for c in range(j0, i + 1):
            vc = v[c - i + b]
            ac = acol[c - i + b]
            for r in range(c, r1 + 1):
                vr = 0.0
                if r <= i:
                    vr = v[r - i + b]
                delta = vr * ac + acol[r - i + b] * vc + aii * vr * vc
                if delta != 0.0:
                    ab[r - c, c] += delta
        if logging:
            if cnt < kind.shape[0]:
                kind[cnt] = 1
                idx[cnt] = i
                for t in range(2 * b + 1):
                    gv[i, t] = v[t]
            cnt += 1
        # chase fill below the band down and off the matrix
        hz = i + b
        col = j0
        while col < n and col <= hz:
            rtop = col + W
            if rtop > n - 1:
                rtop = n - 1
            for r in range(rtop, col + b, -1):
                y = ab[r - col, col]
                if y == 0.0:
                    continue
                x = ab[r - 1 - col, col]
                h = math.hypot(x, y)
                c_ = x / h
                s_ = y / h
                bad += sym_rotate(ab, n, r - 1, c_, s_)
                ab[r - col, col] = 0.0
                ab[r - 1 - col, col] = h
                if logging:
                    cnt = _log_rot(kind, idx, lc, ls, cnt, r - 1, c_, s_)
                if r + b > hz:
                    hz = r + b
            col += 1
    # top rows: 0..m-1, processed downwards
    for i in range(m):
        sii = sd[b, i]
        for t in range(2 * b + 1):
            v[t] = 0.0
            acol[t] = 0.0
        j1 = i + b
        if j1 > m - 1:
            j1 = m - 1
        for j in range(i + 1, j1 + 1):
            v[j - i + b] = -sd[b + i - j, j] / sii
        v[b] = 1.0 / sii - 1.0
        r0 = i - b
        if r0 < 0:
            r0 = 0
        r1 = i + b
        if r1 > n - 1:
            r1 = n - 1
        for t in range(r0, r1 + 1):
            acol[t - i + b] = _sget(ab, t, i)
        aii = acol[b]
        for c in range(r0, r1 + 1):
            vc = 0.0
            if c >= i and c <= j1:
                vc = v[c - i + b]
            ac = acol[c - i + b]
            for r in range(c, r1 + 1):
                vr = 0.0
                if r >= i and r <= j1:
                    vr = v[r - i + b]
                if vr == 0.0 and vc == 0.0:
                    continue
                delta = vr * ac + acol[r - i + b] * vc + aii * vr * vc
                if delta != 0.0:
                    ab[r - c, c] += delta
        if logging:
            if cnt < kind.shape[0]:
                kind[cnt] = 1
                idx[cnt] = i
                for t in range(2 * b + 1):
                    gv[i, t] = v[t]
            cnt += 1
        # chase fill above the band up and off the matrix; the entry
        # A[r, col] (r < col) lives at ab[col - r, r]
        lo_fill = i + 1
        col = r1
        while col >= 0 and col >= lo_fill:
            rbot = col - W
            if rbot < 0:
                rbot = 0
            for r in range(rbot, col - b):
                y = ab[col - r, r]
                if y == 0.0:
                    continue
                x = ab[col - r - 1, r + 1]
                h = math.hypot(x, y)
                c_ = x / h
                s_ = -y / h
                bad += sym_rotate(ab, n, r, c_, s_)
                ab[col - r, r] = 0.0
                ab[col - r - 1, r + 1] = h
                if logging:
                    cnt = _log_rot(kind, idx, lc, ls, cnt, r, c_, s_)
                if r + 1 < lo_fill:
                    lo_fill = r + 1
            col -= 1
    for r in range(b + 1, W + 1):
        for j in range(n - r):
            if ab[r, j] != 0.0:
                bad += 1
    return cnt, bad


@jit
def replay_sbgst(y, kind, idx, lc, ls, gv, cnt, b):
    """Y <- F_1 ... F_cnt Y for the sbgst factor log.

    Rotation factors are R^T on rows (p, p+1); elementary factors are
    I + e_i v^T.
    """
    n = y.shape[0]
    m = y.shape[1]
    for k in range(cnt - 1, -1, -1):
        p = idx[k]
        if kind[k] == 0:
            c = lc[k]
            s = ls[k]
            for t in range(m):
                a = y[p, t]
                bb = y[p + 1, t]
                y[p, t] = c * a - s * bb
                y[p + 1, t] = s * a + c * bb
        else:
            j0 = p - b
            if j0 < 0:
                j0 = 0
            j1 = p + b
            if j1 > n - 1:
                j1 = n - 1
            for t in range(m):
                acc = 0.0
                for j in range(j0, j1 + 1):
                    acc += gv[p, j - p + b] * y[j, t]
                y[p, t] += acc


# ---------------------------------------------------------------------------
# banded QR by Givens rotations


@jit
def band_qr_kernel(w, rows, cols, l, uw, log_i, log_c, log_s):
    """Givens QR of a general band matrix stored with upper width ``uw``.

    ``w[uw + i - j, j] = A[i, j]``; on exit it holds R. Rotations act on
    rows (i - 1, i). Returns the rotation count.
    """
    cnt = 0
    for j in range(cols):
        i_hi = j + l
        if i_hi > rows - 1:
            i_hi = rows - 1
        for i in range(i_hi, j, -1):
            y = w[uw + i - j, j]
            if y == 0.0:
                continue
            x = w[uw + i - 1 - j, j]
            h = math.hypot(x, y)
            c = x / h
            s = y / h
            t_hi = j + uw
            if t_hi > cols - 1:
                t_hi = cols - 1
            for t in range(j + 1, t_hi + 1):
                ra = i - 1 - t + uw
                rb = i - t + uw
                a = 0.0
                if ra >= 0:
                    a = w[ra, t]
                bb = 0.0
                if rb >= 0:
                    bb = w[rb, t]
                na = c * a + s * bb
                nb = -s * a + c * bb
                if ra >= 0:
                    w[ra, t] = na
                if rb >= 0:
                    w[rb, t] = nb
            w[uw + i - 1 - j, j] = h
            w[uw + i - j, j] = 0.0
            log_i[cnt] = i - 1
            log_c[cnt] = c
            log_s[cnt] = s
            cnt += 1
    return cnt


@jit
def givens_apply_kernel(y, log_i, log_c, log_s, cnt, transpose):
    """Y <- Q Y (transpose false) or Q^T Y, Q = G_1^T ... G_cnt^T."""
    m = y.shape[1]
    if transpose:
        for k in range(cnt):
            p = log_i[k]
            c = log_c[k]
            s = log_s[k]
            for t in range(m):
                a = y[p, t]
                bb = y[p + 1, t]
                y[p, t] = c * a + s * bb
                y[p + 1, t] = -s * a + c * bb
    else:
        for k in range(cnt - 1, -1, -1):
            p = log_i[k]
            c = log_c[k]
            s = log_s[k]
            for t in range(m):
                a = y[p, t]
                bb = y[p + 1, t]
                y[p, t] = c * a - s * bb
                y[p + 1, t] = s * a + c * bb


# ---------------------------------------------------------------------------
# banded partial inverse of an upper-triangular band


@jit
def partial_inverse_kernel(cb, n, uc, w, pb):
    """Band part of C^{-1} for upper-triangular C.

    ``cb[uc + i - j, j] = C[i, j]``; ``pb[w + i - j, j] = P[i, j]``.
    Returns the first zero diagonal index, or -1.
    """
    for i in range(n):
        if cb[uc, i] == 0.0:
            return i
    for i in range(n):
        pb[w, i] = 1.0 / cb[uc, i]
        j1 = i + w
        if j1 > n - 1:
            j1 = n - 1
        for j in range(i + 1, j1 + 1):
            k0 = j - uc
            if k0 < i:
                k0 = i
            acc = 0.0
            for k in range(k0, j):
                acc += pb[w + i - k, k] * cb[uc + k - j, j]
            pb[w + i - j, j] = -acc / cb[uc, j]
    return -1

"""numba-compiled kernels.  Same signatures and results as ``_numpy``.

The batched solver is a hand-written LU with partial pivoting so that the
per-harmonic loop runs under ``prange`` without LAPACK round trips; the
1-norm condition number comes from Hager's estimator (with Higham's
alternating-sign safeguard) applied to the LU factors.
"""

import math

import numba as nb
import numpy as np

# the bundled TBB is too old for numba; skip straight to the portable layers
nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

MU_0 = 4e-7 * np.pi

_opts = {"nogil": True, "cache": True}


@nb.njit(**_opts)
def pair_inductance(positions, r_strd, l_cond):
    n = positions.shape[0]
    out = np.empty((n, n))
    self_term = -MU_0 * l_cond / (8.0 * np.pi)
    mutual_scale = -MU_0 * l_cond / (4.0 * np.pi)
    r2 = r_strd * r_strd
    for a in range(n):
        out[a, a] = self_term
        for b in range(a + 1, n):
            dx = positions[a, 0] - positions[b, 0]
            dy = positions[a, 1] - positions[b, 1]
            v = mutual_scale * (math.log((dx * dx + dy * dy) / r2) + 1.0)
            out[a, b] = v
            out[b, a] = v
    return out


@nb.njit(**_opts)
def congruence_sum(strand_of, sign, mats, nsh):
    ns, nc = strand_of.shape
    out = np.zeros((nsh, nsh))
    for s in range(ns):
        for a in range(nc):
            ja = strand_of[s, a]
            if ja < 0:
                continue
            sa = sign[s, a]
            for b in range(nc):
                jb = strand_of[s, b]
                if jb < 0:
                    continue
                out[ja, jb] += sa * sign[s, b] * mats[s, a, b]
    return out


@nb.njit(**_opts)
def _lu_factor(a, piv):
    n = a.shape[0]
    for i in range(n):
        piv[i] = i
    for k in range(n):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                p = i
        if best == 0.0:
            return False
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            t = piv[k]
            piv[k] = piv[p]
            piv[p] = t
        inv = 1.0 / a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] * inv
            a[i, k] = f
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return True


@nb.njit(**_opts)
def _lu_solve(lu, piv, b):
    n = lu.shape[0]
    x = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = b[piv[i]]
        for j in range(i):
            acc -= lu[i, j] * x[j]
        x[i] = acc
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc -= lu[i, j] * x[j]
        x[i] = acc / lu[i, i]
    return x


@nb.njit(**_opts)
def _lu_solve_adjoint(lu, piv, b):
    # A^H z = b with P A = L U  =>  U^H L^H (P z) = b
    n = lu.shape[0]
    u = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = b[i]
        for j in range(i):
            acc -= np.conj(lu[j, i]) * u[j]
        u[i] = acc / np.conj(lu[i, i])
    for i in range(n - 1, -1, -1):
        acc = u[i]
        for j in range(i + 1, n):
            acc -= np.conj(lu[j, i]) * u[j]
        u[i] = acc
    z = np.empty(n, dtype=np.complex128)
    for i in range(n):
        z[piv[i]] = u[i]
    return z


@nb.njit(**_opts)
def _inverse_norm1_estimate(lu, piv):
    n = lu.shape[0]
    x = np.full(n, 1.0 / n + 0j)
    est = 0.0
    for it in range(5):
        y = _lu_solve(lu, piv, x)
        est = np.sum(np.abs(y))
        xi = np.empty(n, dtype=np.complex128)
        for i in range(n):
            m = abs(y[i])
            xi[i] = y[i] / m if m > 0.0 else 1.0 + 0j
        z = _lu_solve_adjoint(lu, piv, xi)
        jmax = 0
        zmax = abs(z[0])
        for i in range(1, n):
            if abs(z[i]) > zmax:
                zmax = abs(z[i])
                jmax = i
        ztx = 0.0
        for i in range(n):
            ztx += (np.conj(z[i]) * x[i]).real
        if it > 0 and zmax <= ztx:
            break
        x[:] = 0.0
        x[jmax] = 1.0
    alt = np.empty(n, dtype=np.complex128)
    for i in range(n):
        s = 1.0 if i % 2 == 0 else -1.0
        alt[i] = s * (1.0 + i / max(n - 1, 1))
    y = _lu_solve(lu, piv, alt)
    est_alt = 2.0 * np.sum(np.abs(y)) / (3.0 * n)
    return max(est, est_alt)


@nb.njit(parallel=True, **_opts)
def _solve_batched(A, B, X, cond):
    nh, n, _ = A.shape
    for h in nb.prange(nh):
        lu = A[h].copy()
        piv = np.empty(n, dtype=np.int64)
        norm_a = 0.0
        for j in range(n):
            col = 0.0
            for i in range(n):
                col += abs(A[h, i, j])
            norm_a = max(norm_a, col)
        if not _lu_factor(lu, piv):
            for i in range(n):
                X[h, i] = np.nan
            cond[h] = np.inf
            continue
        X[h] = _lu_solve(lu, piv, B[h])
        cond[h] = norm_a * _inverse_norm1_estimate(lu, piv)


def solve_batched(A, B):
    A = np.ascontiguousarray(A, dtype=np.complex128)
    B = np.ascontiguousarray(B, dtype=np.complex128)
    X = np.empty(B.shape, dtype=np.complex128)
    cond = np.empty(A.shape[0])
    _solve_batched(A, B, X, cond)
    return X, cond


@nb.njit(parallel=True, **_opts)
def _reconstruct(re, im, orders, phase, out):
    ns = phase.shape[0]
    nh, nsh = re.shape
    root2 = math.sqrt(2.0)
    for t in nb.prange(ns):
        for h in range(nh):
            ang = orders[h] * phase[t]
            c = math.cos(ang)
            s = math.sin(ang)
            for j in range(nsh):
                out[t, j] += root2 * (re[h, j] * c - im[h, j] * s)


def reconstruct(currents, orders, phase):
    currents = np.asarray(currents, dtype=np.complex128)
    out = np.zeros((len(phase), currents.shape[1]))
    _reconstruct(
        np.ascontiguousarray(currents.real),
        np.ascontiguousarray(currents.imag),
        np.asarray(orders, dtype=np.float64),
        np.asarray(phase, dtype=np.float64),
        out,
    )
    return out

"""Pure-numpy kernels (reference path and fallback when numba is missing)."""

import numpy as np

MU_0 = 4e-7 * np.pi


def pair_inductance(positions, r_strd, l_cond):
    pos = np.asarray(positions, dtype=np.float64)
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    n = pos.shape[0]
    off = ~np.eye(n, dtype=bool)
    out = np.empty((n, n))
    out[off] = -(MU_0 * l_cond / (4.0 * np.pi)) * (np.log(d2[off] / r_strd**2) + 1.0)
    out[~off] = -MU_0 * l_cond / (8.0 * np.pi)
    return out


def _dense_maps(strand_of, sign, nsh):
    ns, nc = strand_of.shape
    M = np.zeros((ns, nc, nsh))
    s_idx, c_idx = np.nonzero(strand_of >= 0)
    M[s_idx, c_idx, strand_of[s_idx, c_idx]] = sign[s_idx, c_idx]
    return M


def congruence_sum(strand_of, sign, mats, nsh):
    M = _dense_maps(strand_of, sign, nsh)
    return np.sum(np.swapaxes(M, 1, 2) @ mats @ M, axis=0)


def solve_batched(A, B):
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    nh = A.shape[0]
    X = np.full(B.shape, np.nan + 0j)
    cond = np.full(nh, np.inf)
    for h in range(nh):
        try:
            X[h] = np.linalg.solve(A[h], B[h])
            inv = np.linalg.inv(A[h])
        except np.linalg.LinAlgError:
            continue
        cond[h] = np.linalg.norm(A[h], 1) * np.linalg.norm(inv, 1)
    return X, cond


def reconstruct(currents, orders, phase):
    E = np.exp(1j * np.outer(phase, orders))
    return np.sqrt(2.0) * (E @ np.asarray(currents)).real

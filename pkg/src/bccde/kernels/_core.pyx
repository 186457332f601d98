"""Compiled log-MAP and erasure forward-backward kernels.

Mirrors bccde.kernels._core_py; accumulation order is identical, so the
two backends agree to floating-point round-off (~1e-12).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()

cdef double NEG = -1e30
# Metrics below this are unreachable states; skipping them avoids
# propagating -1e30 through sums that could only vanish anyway.
cdef double CUT = -1e29
# For |a - b| above this, log1p(exp(-|a - b|)) is below half an ulp of any
# metric of interest, so max() is the exact double result.
cdef double EXACT = 45.0


cdef inline double max_star(double a, double b) noexcept nogil:
    cdef double d = a - b
    if d >= 0.0:
        if d > EXACT:
            return a
        return a + log1p(exp(-d))
    if d < -EXACT:
        return b
    return b + log1p(exp(d))


def bcjr_map_batch(next_state, edge_bits, llrs, start_uniform, end_uniform, double cap=300.0):
    """Batched log-MAP extrinsic pass; see the NumPy twin for the contract."""
    cdef const cnp.int32_t[:, ::1] ns = np.ascontiguousarray(next_state, dtype=np.int32)
    cdef const cnp.uint8_t[:, :, ::1] bits = np.ascontiguousarray(edge_bits, dtype=np.uint8)
    cdef const double[:, :, ::1] L = np.ascontiguousarray(llrs, dtype=np.float64)
    cdef bint s_uni = start_uniform
    cdef bint e_uni = end_uniform
    cdef Py_ssize_t S = ns.shape[0]
    cdef Py_ssize_t E = ns.shape[1]
    cdef Py_ssize_t B = L.shape[0]
    cdef Py_ssize_t R = L.shape[1]
    cdef Py_ssize_t N = L.shape[2]
    if bits.shape[0] != S or bits.shape[1] != E or bits.shape[2] != R:
        raise ValueError("table shapes disagree with LLR shape")
    if S > 256 or E > 16 or R > 4:
        raise ValueError("trellis too large for the compiled kernel")

    out_arr = np.empty((B, R, N), dtype=np.float64)
    alpha_arr = np.empty((N + 1, S), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, ::1] alpha = alpha_arr
    cdef double beta[256]
    cdef double nwork[256]
    cdef double h[4]
    cdef double c[4]
    cdef double acc0[4]
    cdef double acc1[4]
    cdef Py_ssize_t b, t, s, e, r, s2
    cdef double a, g, m, mx, v, bnext

    with nogil:
        for b in range(B):
            # Forward metrics, normalised per section.
            if s_uni:
                for s in range(S):
                    alpha[0, s] = 0.0
            else:
                for s in range(S):
                    alpha[0, s] = NEG
                alpha[0, 0] = 0.0
            for t in range(N):
                for r in range(R):
                    h[r] = 0.5 * L[b, r, t]
                for s2 in range(S):
                    nwork[s2] = NEG
                for s in range(S):
                    a = alpha[t, s]
                    if a < CUT:
                        continue
                    for e in range(E):
                        g = 0.0
                        for r in range(R):
                            if bits[s, e, r] == 0:
                                g += h[r]
                            else:
                                g -= h[r]
                        s2 = ns[s, e]
                        nwork[s2] = max_star(nwork[s2], a + g)
                mx = NEG
                for s2 in range(S):
                    if nwork[s2] > mx:
                        mx = nwork[s2]
                for s2 in range(S):
                    v = nwork[s2] - mx
                    alpha[t + 1, s2] = v if v > NEG else NEG

            # Backward metrics fused with the extrinsic outputs.
            if e_uni:
                for s in range(S):
                    beta[s] = 0.0
            else:
                for s in range(S):
                    beta[s] = NEG
                beta[0] = 0.0
            for t in range(N - 1, -1, -1):
                for r in range(R):
                    h[r] = 0.5 * L[b, r, t]
                    acc0[r] = NEG
                    acc1[r] = NEG
                for s in range(S):
                    nwork[s] = NEG
                for s in range(S):
                    a = alpha[t, s]
                    for e in range(E):
                        g = 0.0
                        for r in range(R):
                            if bits[s, e, r] == 0:
                                c[r] = h[r]
                            else:
                                c[r] = -h[r]
                            g += c[r]
                        s2 = ns[s, e]
                        bnext = beta[s2]
                        nwork[s] = max_star(nwork[s], bnext + g)
                        if a < CUT or bnext < CUT:
                            continue
                        m = a + g + bnext
                        for r in range(R):
                            if bits[s, e, r] == 0:
                                acc0[r] = max_star(acc0[r], m - c[r])
                            else:
                                acc1[r] = max_star(acc1[r], m - c[r])
                for r in range(R):
                    v = acc0[r] - acc1[r]
                    if v > cap:
                        v = cap
                    elif v < -cap:
                        v = -cap
                    out[b, r, t] = v
                mx = NEG
                for s in range(S):
                    if nwork[s] > mx:
                        mx = nwork[s]
                for s in range(S):
                    v = nwork[s] - mx
                    beta[s] = v if v > NEG else NEG
    return out_arr


def bcjr_erasure_batch(fwd_table, bwd_table, ext_table, obs, start_uniform, end_uniform):
    """Batched exact erasure pass; see the NumPy twin for the contract."""
    cdef const cnp.uint16_t[:, ::1] fwd = np.ascontiguousarray(fwd_table, dtype=np.uint16)
    cdef const cnp.uint16_t[:, ::1] bwd = np.ascontiguousarray(bwd_table, dtype=np.uint16)
    cdef const cnp.uint8_t[:, :, ::1] ext = np.ascontiguousarray(ext_table, dtype=np.uint8)
    cdef const cnp.uint8_t[:, ::1] ob = np.ascontiguousarray(obs, dtype=np.uint8)
    cdef bint s_uni = start_uniform
    cdef bint e_uni = end_uniform
    cdef Py_ssize_t B = ob.shape[0]
    cdef Py_ssize_t N = ob.shape[1]
    cdef int full = fwd.shape[0] - 1

    packed_arr = np.zeros((B, N), dtype=np.uint8)
    ok_arr = np.ones(B, dtype=bool)
    bad_arr = np.full(B, -1, dtype=np.int64)
    am_arr = np.empty(N + 1, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] packed = packed_arr
    cdef cnp.uint8_t[::1] ok = ok_arr.view(np.uint8)
    cdef cnp.int64_t[::1] bad = bad_arr
    cdef cnp.int64_t[::1] am = am_arr
    cdef Py_ssize_t b, t
    cdef long long bm
    cdef int dead

    with nogil:
        for b in range(B):
            am[0] = full if s_uni else 1
            dead = -1
            for t in range(N):
                am[t + 1] = fwd[am[t], ob[b, t]]
                if am[t + 1] == 0:
                    dead = <int> t
                    break
            if dead >= 0:
                ok[b] = 0
                bad[b] = dead
                continue
            bm = full if e_uni else 1
            for t in range(N - 1, -1, -1):
                packed[b, t] = ext[am[t], bm, ob[b, t]]
                bm = bwd[bm, ob[b, t]]
    return packed_arr, ok_arr, bad_arr

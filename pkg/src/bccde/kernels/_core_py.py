"""NumPy reference implementation of the decoder kernels.

Semantics are the contract for the compiled backend: identical inputs must
produce the same outputs up to floating-point round-off (~1e-12).  Metrics
live in the log domain; -1e30 plays the role of log(0) and stays safely
representable through any number of additions.
"""

import numpy as np

NEG = -1e30


def bcjr_map_batch(next_state, edge_bits, llrs, start_uniform, end_uniform, cap=300.0):
    """Batched log-MAP extrinsic pass over one trellis.

    next_state: (S, E) int32, edge_bits: (S, E, R) uint8, llrs: (B, R, N).
    Returns extrinsic LLRs of shape (B, R, N), clipped to [-cap, cap].
    Branch metrics use the exact correction log1p(exp(-|d|)), so the result
    is the true a-posteriori extrinsic, not a max-log approximation.
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    B, R, N = llrs.shape
    S, E = next_state.shape
    bits_flat = edge_bits.reshape(S * E, R)
    sgn = 1.0 - 2.0 * bits_flat.astype(np.float64)
    src = np.repeat(np.arange(S), E)
    tgt = next_state.ravel().astype(np.int64)
    incoming = [np.flatnonzero(tgt == s) for s in range(S)]
    idx0 = [np.flatnonzero(bits_flat[:, r] == 0) for r in range(R)]
    idx1 = [np.flatnonzero(bits_flat[:, r] == 1) for r in range(R)]

    half = 0.5 * llrs
    # gamma[b, t, se]: full branch metric of edge se at section t.
    gamma = np.einsum("er,brn->bne", sgn, half)

    alpha = np.empty((B, N + 1, S))
    alpha[:, 0, :] = 0.0 if start_uniform else NEG
    if not start_uniform:
        alpha[:, 0, 0] = 0.0
    for t in range(N):
        vals = alpha[:, t, src] + gamma[:, t, :]
        na = np.full((B, S), NEG)
        for s in range(S):
            grp = incoming[s]
            if grp.size:
                na[:, s] = np.logaddexp.reduce(vals[:, grp], axis=1)
        na -= na.max(axis=1, keepdims=True)
        alpha[:, t + 1, :] = np.maximum(na, NEG)

    out = np.empty_like(llrs)
    beta = np.zeros((B, S))
    if not end_uniform:
        beta[:, 1:] = NEG
    for t in range(N - 1, -1, -1):
        g = gamma[:, t, :]
        base = alpha[:, t, src] + g + beta[:, tgt]
        for r in range(R):
            excl = base - sgn[None, :, r] * half[:, r, t][:, None]
            a0 = np.logaddexp.reduce(excl[:, idx0[r]], axis=1) if idx0[r].size else np.full(B, NEG)
            a1 = np.logaddexp.reduce(excl[:, idx1[r]], axis=1) if idx1[r].size else np.full(B, NEG)
            out[:, r, t] = np.clip(a0 - a1, -cap, cap)
        nb = np.logaddexp.reduce((beta[:, tgt] + g).reshape(B, S, E), axis=2)
        nb -= nb.max(axis=1, keepdims=True)
        beta = np.maximum(nb, NEG)
    return out


def bcjr_erasure_batch(fwd_table, bwd_table, ext_table, obs, start_uniform, end_uniform):
    """Batched exact forward-backward pass under pure erasures.

    State knowledge is a bitmask over trellis states; the tables map
    (mask, observation) transitions and (fwd mask, bwd mask, observation)
    to packed per-rail output trits.  Returns (packed, ok, first_bad):
    rows with ok[b] False hit an empty state set (no consistent codeword)
    at section first_bad[b], and their packed content is unspecified.
    """
    B, N = obs.shape
    n_masks = fwd_table.shape[0]
    full = n_masks - 1
    am = np.empty((B, N + 1), dtype=np.int64)
    am[:, 0] = full if start_uniform else 1
    for t in range(N):
        am[:, t + 1] = fwd_table[am[:, t], obs[:, t]]
    ok = am[:, N] != 0
    first_bad = np.where(ok, -1, np.argmax(am == 0, axis=1) - 1)
    packed = np.zeros((B, N), dtype=np.uint8)
    bm = np.full(B, full if end_uniform else 1, dtype=np.int64)
    for t in range(N - 1, -1, -1):
        packed[:, t] = ext_table[am[:, t], bm, obs[:, t]]
        bm = bwd_table[bm, obs[:, t]]
    return packed, ok, first_bad

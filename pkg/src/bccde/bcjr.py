"""Extrinsic a-posteriori decoding on component trellises.

Two exact regimes share one entry point.  Finite (possibly saturated) LLRs
go through the log-MAP kernel.  Inputs that are exactly erasure-valued
(every entry 0 or +-LLR_CAP) go through a Boolean-semiring kernel that
tracks the set of trellis states consistent with the known bits; under
pure erasures the a-posteriori marginals are exactly {0, +-inf}, and the
erasure kernel returns that closed form directly instead of approximating
it through floating-point path metrics.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ConfigError, DecodeContradictionError
from .llr import LLR_CAP, is_erasure_valued, llrs_to_trits, trits_to_llrs
from .trellis import Trellis

BOUNDARY_ZERO = "zero"
BOUNDARY_UNIFORM = "uniform"
_BOUNDARIES = (BOUNDARY_ZERO, BOUNDARY_UNIFORM)


def _check_boundary(name, value):
    if value not in _BOUNDARIES:
        raise ConfigError(f"{name} boundary must be one of {_BOUNDARIES}, got {value!r}")


def bcjr_extrinsic(trellis, llrs, start=BOUNDARY_ZERO, end=BOUNDARY_UNIFORM, erasure=None):
    """Extrinsic LLRs for a single (num_rails, N) block; see the batch form."""
    llrs = np.asarray(llrs, dtype=np.float64)
    return bcjr_extrinsic_batch(trellis, llrs[None], start=start, end=end, erasure=erasure)[0]


def bcjr_extrinsic_batch(
    trellis: Trellis,
    llrs: np.ndarray,
    start: str = BOUNDARY_ZERO,
    end: str = BOUNDARY_UNIFORM,
    erasure: bool | None = None,
) -> np.ndarray:
    """Extrinsic LLRs for a batch of blocks, shape (B, num_rails, N).

    erasure=None auto-detects the erasure regime; True forces the erasure
    kernel (raising if the inputs are not erasure-valued); False forces
    log-MAP.  Raises DecodeContradictionError when known bits rule out
    every codeword, which cannot happen for channel-consistent inputs.
    """
    _check_boundary("start", start)
    _check_boundary("end", end)
    a = np.ascontiguousarray(llrs, dtype=np.float64)
    if a.ndim != 3 or a.shape[1] != trellis.num_rails:
        raise ConfigError(
            f"expected llrs of shape (B, {trellis.num_rails}, N), got {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise ConfigError("LLRs must be finite; use +-LLR_CAP for certainty")
    if np.max(np.abs(a), initial=0.0) > LLR_CAP:
        raise ConfigError(f"LLR magnitude above LLR_CAP={LLR_CAP}")

    if erasure is None:
        erasure = is_erasure_valued(a)
    elif erasure and not is_erasure_valued(a):
        raise ConfigError("erasure kernel requires all LLRs in {0, +-LLR_CAP}")

    impl = kernels.active()
    if not erasure:
        return impl.bcjr_map_batch(
            trellis.next_state,
            trellis.edge_bits,
            a,
            start == BOUNDARY_UNIFORM,
            end == BOUNDARY_UNIFORM,
            cap=LLR_CAP,
        )

    fwd, bwd, ext, pack_lut = erasure_tables(trellis)
    trits = llrs_to_trits(a)
    weights = (3 ** np.arange(trellis.num_rails)).astype(np.uint8)
    obs = np.einsum("brn,r->bn", trits, weights, dtype=np.int64).astype(np.uint8)
    packed, ok, first_bad = impl.bcjr_erasure_batch(
        fwd, bwd, ext, obs, start == BOUNDARY_UNIFORM, end == BOUNDARY_UNIFORM
    )
    if not ok.all():
        b = int(np.flatnonzero(~ok)[0])
        raise DecodeContradictionError(
            f"block {b}: known bits are inconsistent with every codeword "
            f"(state set empty at section {int(first_bad[b])})"
        )
    # pack_lut maps packed trit codes to per-rail LLR columns.
    return trits_to_llrs(pack_lut[packed]).transpose(0, 2, 1).copy()


def erasure_tables(trellis: Trellis):
    """Transition tables for the erasure kernel, cached on the trellis.

    fwd[mask, obs] / bwd[mask, obs] propagate reachable-state bitmasks one
    section forward/backward given the observation code (one trit per rail,
    packed base 3).  ext[fwd_mask, bwd_mask, obs] packs the per-rail output
    trits, with each rail's own observation excluded from its consistency
    test (extrinsic semantics).
    """
    if trellis._erasure_tables is not None:
        return trellis._erasure_tables

    S, E, R = trellis.num_states, trellis.num_edges, trellis.num_rails
    if S > 8:
        raise ConfigError("erasure tables support up to 8 trellis states")
    n_obs = 3**R
    n_masks = 1 << S
    bits = trellis.edge_bits
    bits_flat = bits.reshape(S * E, R)

    codes = np.arange(n_obs)
    obs_trits = (codes[:, None] // (3 ** np.arange(R))[None, :]) % 3
    # agree[o, s, e, r]: edge (s, e) consistent with observation o on rail r.
    agree = (obs_trits[:, None, None, :] == bits[None, :, :, :]) | (
        obs_trits[:, None, None, :] == 2
    )
    ok_full = agree.all(axis=3).reshape(n_obs, S * E)

    masks = np.arange(n_masks)
    has = ((masks[:, None] >> np.arange(S)[None, :]) & 1).astype(bool)
    src = np.repeat(np.arange(S), E)
    tgt = trellis.next_state.ravel()

    fwd = np.zeros((n_masks, n_obs), dtype=np.uint16)
    bwd = np.zeros((n_masks, n_obs), dtype=np.uint16)
    for j in range(S * E):
        live = has[:, src[j]][:, None] & ok_full[:, j][None, :]
        fwd |= live.astype(np.uint16) << int(tgt[j])
        live = has[:, tgt[j]][:, None] & ok_full[:, j][None, :]
        bwd |= live.astype(np.uint16) << int(src[j])

    ext = np.zeros((n_masks, n_masks, n_obs), dtype=np.uint8)
    for r in range(R):
        others = [q for q in range(R) if q != r]
        ok_r = agree[:, :, :, others].all(axis=3).reshape(n_obs, S * E)
        seen = np.zeros((2, n_masks, n_masks, n_obs), dtype=bool)
        for j in range(S * E):
            live = (
                has[:, src[j]][:, None, None]
                & has[:, tgt[j]][None, :, None]
                & ok_r[:, j][None, None, :]
            )
            seen[int(bits_flat[j, r])] |= live
        trit = np.where(seen[0] & ~seen[1], 0, np.where(seen[1] & ~seen[0], 1, 2))
        ext += trit.astype(np.uint8) * (3**r)

    pack_lut = (np.arange(3**R)[:, None] // (3 ** np.arange(R))[None, :]) % 3
    tables = (fwd, bwd, ext, pack_lut)
    trellis._erasure_tables = tables
    return tables

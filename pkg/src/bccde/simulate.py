"""Sliding-window decoding of braided chains and BER measurement.

The decoder passes extrinsic LLRs between the two component trellises
through the permutor/coupling structure.  A window of w consecutive time
instants is iterated a fixed number of times, the left-most info block is
decided, and the window slides one instant; all messages persist across
window positions (warm start).  Blocks before the chain start are known
perfectly; trellis nodes beyond the chain end simply contribute nothing.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .bcjr import bcjr_extrinsic_batch
from .channel import ChannelParam, channel_llrs, sigma_from_ebno
from .ensemble import (
    VAR_INFO,
    VAR_LOWER,
    VAR_UPPER,
    BccSpec,
    CodedChain,
    apply_puncture,
    build_permutors,
    encode_chain,
)
from .errors import ConfigError
from .llr import LLR_CAP, clamp
from .trellis import build_trellis


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window decoder tuning: window size in time instants and
    flooding iterations per window position."""

    size: int = 5
    iterations: int = 20

    def __post_init__(self):
        if self.size < 1 or self.iterations < 1:
            raise ConfigError("window size and iterations must be >= 1")


@dataclass(frozen=True)
class BerPoint:
    """One measured point of a BER sweep."""

    ebno_db: float
    bits: int
    errors: int
    ber: float
    chains: int
    seed: int
    spec_digest: str


def transmit(chain: CodedChain, param: ChannelParam, rng) -> np.ndarray:
    """Channel LLRs of one coded chain, shape (3, L, N) ordered
    (info, upper parity, lower parity); punctured positions carry LLR 0."""
    bits = np.stack([chain.info, chain.parity_upper, chain.parity_lower])
    llrs = channel_llrs(bits, param, rng)
    if chain.puncture_mask is not None:
        llrs[chain.puncture_mask] = 0.0
    return llrs


class _ChainDecoder:
    """Message-passing state over one received chain."""

    _VARS = (VAR_INFO, VAR_UPPER, VAR_LOWER)

    def __init__(self, llrs, spec: BccSpec):
        if spec.coupling_memory < 1:
            raise ConfigError("decoding requires a coupled chain (m >= 1)")
        L, N = spec.chain_length, spec.block_length
        if llrs.shape != (3, L, N):
            raise ConfigError(f"expected LLRs of shape {(3, L, N)}, got {llrs.shape}")
        self.spec = spec
        self.L, self.N = L, N
        self.m = spec.coupling_memory
        self.chunk = N // self.m
        self.trellis = build_trellis(spec.component)
        self.perms = build_permutors(spec)
        self.ch = {v: llrs[i] for i, v in enumerate(self._VARS)}
        # ext[(var, side)][t]: extrinsic about variable (var, t) written by
        # the trellis nodes of that side, stored in variable order.
        self.ext = {
            (v, side): np.zeros((L, N)) for v in self._VARS for side in (0, 1)
        }

    def _gather(self, t, side):
        """A-priori rail LLRs (3, N) for node (t, side): channel plus the
        peer-endpoint extrinsic of each attached variable."""
        N, m, c = self.N, self.m, self.chunk
        out = np.empty((3, N))
        if side == 0:
            info_idx = None
            cross_var, own_var = VAR_LOWER, VAR_UPPER
        else:
            info_idx = self.perms[(VAR_INFO, t)].perm
            cross_var, own_var = VAR_UPPER, VAR_LOWER
        other = 1 - side

        vals = self.ch[VAR_INFO][t] + self.ext[(VAR_INFO, other)][t]
        out[0] = vals if info_idx is None else vals[info_idx]

        for d in range(1, m + 1):
            ts = t - d
            lo, hi = (d - 1) * c, d * c
            if ts < 0:
                out[1, lo:hi] = LLR_CAP
            else:
                idx = self.perms[(cross_var, ts)].perm[lo:hi]
                out[1, lo:hi] = (
                    self.ch[cross_var][ts][idx] + self.ext[(cross_var, other)][ts][idx]
                )

        out[2] = self.ch[own_var][t] + self.ext[(own_var, other)][t]
        return clamp(out)

    def _scatter(self, t, side, ext):
        """Write back the node's extrinsic rails in variable order."""
        m, c = self.m, self.chunk
        if side == 0:
            info_idx = None
            cross_var, own_var = VAR_LOWER, VAR_UPPER
        else:
            info_idx = self.perms[(VAR_INFO, t)].perm
            cross_var, own_var = VAR_UPPER, VAR_LOWER

        if info_idx is None:
            self.ext[(VAR_INFO, side)][t] = ext[0]
        else:
            self.ext[(VAR_INFO, side)][t][info_idx] = ext[0]

        for d in range(1, m + 1):
            ts = t - d
            if ts >= 0:
                lo, hi = (d - 1) * c, d * c
                idx = self.perms[(cross_var, ts)].perm[lo:hi]
                self.ext[(cross_var, side)][ts][idx] = ext[1, lo:hi]

        self.ext[(own_var, side)][t] = ext[2]

    def iterate(self, t_lo, t_hi, iterations):
        """Flooding iterations over nodes t_lo..t_hi-1, both sides."""
        nodes = [(t, side) for t in range(t_lo, t_hi) for side in (0, 1)]
        for _ in range(iterations):
            batch = np.stack([self._gather(t, s) for t, s in nodes])
            outs = bcjr_extrinsic_batch(self.trellis, batch)
            for (t, s), ext in zip(nodes, outs):
                self._scatter(t, s, ext)

    def info_app(self, t):
        """A-posteriori LLRs of info block t."""
        return (
            self.ch[VAR_INFO][t]
            + self.ext[(VAR_INFO, 0)][t]
            + self.ext[(VAR_INFO, 1)][t]
        )

    def decide(self, t):
        return (self.info_app(t) < 0).astype(np.uint8)


def decode_window(llrs, spec: BccSpec, wcfg: WindowConfig) -> np.ndarray:
    """Sliding-window decode; returns decided info bits of shape (L, N)."""
    dec = _ChainDecoder(np.asarray(llrs, dtype=np.float64), spec)
    out = np.empty((dec.L, dec.N), dtype=np.uint8)
    for t0 in range(dec.L):
        dec.iterate(t0, min(t0 + wcfg.size, dec.L), wcfg.iterations)
        out[t0] = dec.decide(t0)
    return out


def decode_full(llrs, spec: BccSpec, iterations: int):
    """Full-chain flooding reference: iterate everything, then decide all.

    Returns (decided bits (L, N), info APP LLRs (L, N))."""
    dec = _ChainDecoder(np.asarray(llrs, dtype=np.float64), spec)
    dec.iterate(0, dec.L, iterations)
    bits = np.stack([dec.decide(t) for t in range(dec.L)])
    app = np.stack([dec.info_app(t) for t in range(dec.L)])
    return bits, app


def _chain_errors(spec, wcfg, sigma, seed, pi, ci):
    """Encode, transmit, and window-decode chain ci of sweep point pi;
    returns its bit-error count.  Pure function of the arguments."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, pi, ci]))
    info = rng.integers(0, 2, size=(spec.chain_length, spec.block_length), dtype=np.uint8)
    chain = encode_chain(spec, info)
    if spec.puncture.pattern != "none":
        chain = apply_puncture(chain, rng)
    llrs = transmit(chain, ChannelParam("biawgn", sigma), rng)
    decided = decode_window(llrs, spec, wcfg)
    return int(np.count_nonzero(decided != info))


def _checkpoint_load(path, digest, seed):
    if path is None or not os.path.exists(path):
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if data.get("spec_digest") != digest or data.get("seed") != seed:
        raise ConfigError(
            f"checkpoint {path} belongs to a different run "
            f"(digest {data.get('spec_digest')}, seed {data.get('seed')})"
        )
    return {float(k): v for k, v in data.get("points", {}).items()}

def _checkpoint_save(path, digest, seed, points):
    if path is None:
        return
    payload = {
        "schema_version": 1,
        "spec_digest": digest,
        "seed": seed,
        "points": {repr(k): v for k, v in points.items()},
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def run_ber_sweep(
    spec: BccSpec,
    wcfg: WindowConfig,
    ebno_list,
    min_errors: int = 200,
    max_bits: int = 100_000_000,
    seed: int = 0,
    checkpoint_path: str | None = None,
    workers: int = 1,
) -> list:
    """Measure info-bit BER at each Eb/N0 point (dB).

    Each chain draws fresh info bits, puncture positions, and noise from a
    stream seeded by (seed, point index, chain index), so results are
    reproducible bit for bit and resumable from the checkpoint file.  A
    point stops at min_errors bit errors or max_bits decoded bits; with
    workers > 1 chains decode speculatively in waves but counters are
    consumed in chain order, so the totals match a single-worker run.
    """
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    rate = spec.effective_rate()
    digest = spec.digest()
    L, N = spec.chain_length, spec.block_length
    state = _checkpoint_load(checkpoint_path, digest, seed)
    pool = None
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=workers)
    results = []
    for pi, ebno in enumerate(ebno_list):
        ebno = float(ebno)
        st = state.get(ebno, {"chains": 0, "bits": 0, "errors": 0})
        sigma = sigma_from_ebno(ebno, rate)
        while st["errors"] < min_errors and st["bits"] < max_bits:
            ci0 = st["chains"]
            if pool is None:
                wave = [_chain_errors(spec, wcfg, sigma, seed, pi, ci0)]
            else:
                wave = list(
                    pool.map(
                        _chain_errors,
                        *zip(*[(spec, wcfg, sigma, seed, pi, ci0 + k) for k in range(workers)]),
                    )
                )
            for errs in wave:
                st["errors"] += errs
                st["bits"] += L * N
                st["chains"] += 1
                if st["errors"] >= min_errors or st["bits"] >= max_bits:
                    break
            state[ebno] = st
            _checkpoint_save(checkpoint_path, digest, seed, state)
        results.append(
            BerPoint(
                ebno_db=ebno,
                bits=st["bits"],
                errors=st["errors"],
                ber=st["errors"] / st["bits"] if st["bits"] else math.nan,
                chains=st["chains"],
                seed=seed,
                spec_digest=digest,
            )
        )
    if pool is not None:
        pool.shutdown()
    return results

"""Monte-Carlo density evolution and threshold search.

One evolution iteration updates every trellis node of the ensemble graph
in parallel (flooding): for each node, fresh i.i.d. samples are drawn from
the peer extrinsic densities and the channel, combined at the variable
nodes, pushed through the component a-posteriori decoder, and the output
sample pools are summarised back into densities.  Blocks are batched
through the decoder until the running output BER moves by less than the
stability tolerance between batches, which adapts the sampling effort to
the noise level of the estimate.

Density representation follows the channel: BEC messages stay exactly
erasure-valued and use the closed-form erasure decoder; AWGN messages are
tracked as sample pools (mode "mc") or projected onto symmetric Gaussians
after each node ("ga"), optionally averaging the three input densities of
a node into one ("ga-se", the classical single-density EXIT approximation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .bcjr import bcjr_extrinsic_batch
from .channel import ChannelParam, mi_awgn_mu_inv, sigma_from_ebno
from .density import (
    MODE_ERASURE,
    MODE_FULL,
    MODE_GAUSSIAN,
    MessageDensity,
    ber_of,
    channel_density,
    draw_mixture,
    mixture_info,
)
from .ensemble import EnsembleGraph
from .errors import BracketError, BudgetError, ConfigError, LlrContradictionError
from .llr import LLR_CAP, clamp

MODE_MC = "mc"
MODE_GA = "ga"
MODE_GA_SE = "ga-se"
_MODES = (MODE_MC, MODE_GA, MODE_GA_SE)


@dataclass(frozen=True)
class DeConfig:
    """Tuning of the evolution engine and the threshold search."""

    mode: str = MODE_MC
    pool_size: int = 100_000
    seq_length: int = 1000
    blocks_per_batch: int = 25
    max_batches: int = 64
    stability_tol: float = 1e-4
    max_iterations: int = 2000
    target_ber: float = 1e-6
    sustain_iterations: int = 5
    stall_window: int = 50
    stall_rel_improvement: float = 1e-3
    resolution_eps: float = 0.001
    resolution_db: float = 0.02
    max_evaluations: int = 80
    ga_matching: str = "mi"

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"unknown DE mode {self.mode!r}; have {_MODES}")
        for name in ("pool_size", "seq_length", "blocks_per_batch", "max_batches",
                     "max_iterations", "sustain_iterations", "stall_window",
                     "max_evaluations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("stability_tol", "target_ber", "stall_rel_improvement",
                     "resolution_eps", "resolution_db"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.ga_matching not in ("mi", "mean"):
            raise ConfigError("ga_matching must be 'mi' or 'mean'")


def vn_update(channel_llrs, extrinsic_llrs):
    """Variable-node combine: sum of LLRs, saturated.

    Opposite saturated values would be an inf - inf contradiction; under
    the all-zero convention that cannot happen, so it raises."""
    a = np.asarray(channel_llrs, dtype=np.float64)
    b = np.asarray(extrinsic_llrs, dtype=np.float64)
    conflict = ((a == LLR_CAP) & (b == -LLR_CAP)) | ((a == -LLR_CAP) & (b == LLR_CAP))
    if np.any(conflict):
        raise LlrContradictionError("saturated LLRs of opposite sign combined")
    return clamp(a + b)


@dataclass
class EdgeState:
    """Output extrinsic densities of every trellis node, indexed
    [position][side][rail]; out-of-range positions read as perfect."""

    graph: EnsembleGraph
    densities: list

    @classmethod
    def initial(cls, graph, repr_mode):
        dens = [
            [[MessageDensity.no_info(repr_mode) for _ in range(3)] for _ in range(2)]
            for _ in range(graph.n_positions)
        ]
        return cls(graph=graph, densities=dens)

    def get(self, t, side, rail):
        if not 0 <= t < self.graph.n_positions:
            return MessageDensity.perfect()
        return self.densities[t][side][rail]

    def input_components(self, t, side):
        """Mixture components feeding each rail of node (t, side)."""
        return [
            [self.get(tt, ss, rr) for (tt, ss, rr) in self.graph.input_refs(t, side, rail)]
            for rail in range(3)
        ]


def tn_update(trellis, ext_components, channel_draws, cfg: DeConfig, rng, erasure: bool):
    """One trellis-node density update.

    ext_components: per rail, the list of peer densities (equal-weight
    mixture); channel_draws: per rail, a draw(n, rng) callable.  Batches
    blocks until the running BER estimate of every output rail moves less
    than cfg.stability_tol between consecutive batches (and at least
    cfg.pool_size samples are in), then summarises the output pools.
    Returns ([MessageDensity] * 3, diagnostics dict).
    """
    R = trellis.num_rails
    N, B = cfg.seq_length, cfg.blocks_per_batch
    want_pool = not erasure and cfg.mode == MODE_MC
    want_mi = not erasure and cfg.mode in (MODE_GA, MODE_GA_SE) and cfg.ga_matching == "mi"
    want_mean = not erasure and cfg.mode in (MODE_GA, MODE_GA_SE) and cfg.ga_matching == "mean"

    neg = np.zeros(R)
    zero = np.zeros(R)
    mi_acc = np.zeros(R)
    mean_acc = np.zeros(R)
    pools = [[] for _ in range(R)]
    n = 0
    prev = None
    batches = 0
    while True:
        batches += 1
        nb = B * N
        llr = np.empty((B, R, N))
        for r in range(R):
            ch = channel_draws[r](nb, rng)
            ex = draw_mixture(ext_components[r], nb, rng)
            llr[:, r, :] = vn_update(ch, ex).reshape(B, N)
        out = bcjr_extrinsic_batch(trellis, llr, erasure=erasure)
        for r in range(R):
            o = out[:, r, :]
            neg[r] += np.count_nonzero(o < 0)
            zero[r] += np.count_nonzero(o == 0)
            if want_mi:
                mi_acc[r] += float(np.logaddexp(0.0, -o).sum())
            if want_mean:
                mean_acc[r] += float(o.sum())
            if want_pool:
                pools[r].append(o.ravel().copy())
        n += nb
        ber = (neg + 0.5 * zero) / n
        if (
            prev is not None
            and n >= cfg.pool_size
            and float(np.max(np.abs(ber - prev))) < cfg.stability_tol
        ):
            break
        if batches >= cfg.max_batches:
            break
        prev = ber

    densities = []
    for r in range(R):
        if erasure:
            if neg[r]:
                raise LlrContradictionError(
                    "erasure-regime decoder produced a known-one output "
                    "under the all-zero convention"
                )
            densities.append(MessageDensity.erasure(zero[r] / n))
        elif cfg.mode == MODE_MC:
            pool = np.concatenate(pools[r])[: cfg.pool_size]
            densities.append(MessageDensity.full(pool))
        else:
            if cfg.ga_matching == "mi":
                info = 1.0 - mi_acc[r] / (n * np.log(2.0))
                mu = 0.0 if info <= 0.0 else mi_awgn_mu_inv(min(info, 1.0))
            else:
                mu = max(mean_acc[r] / n, 0.0)
            densities.append(MessageDensity.gaussian(mu))
    diag = {"ber": (neg + 0.5 * zero) / n, "samples": n, "batches": batches}
    return densities, diag


@dataclass
class DeResult:
    """Outcome of one density-evolution run at a fixed channel parameter."""

    converged: bool
    reason: str
    iterations: int
    max_ber: float
    mean_ber: float
    max_ber_trajectory: list
    mean_ber_trajectory: list
    position_ber: np.ndarray


def _repr_mode(cfg_mode, erasure):
    if erasure:
        return MODE_ERASURE
    return MODE_FULL if cfg_mode == MODE_MC else MODE_GAUSSIAN


def de_run(graph: EnsembleGraph, param: ChannelParam, cfg: DeConfig, seed: int = 0) -> DeResult:
    """Run density evolution to convergence, stall, or the iteration cap.

    Convergence: max-over-positions BER below cfg.target_ber for
    cfg.sustain_iterations consecutive iterations.  Stall: the mean BER
    improves by less than cfg.stall_rel_improvement (relatively) across
    cfg.stall_window iterations; the mean is used because a decoding wave
    holds the worst position constant while it progresses.

    Sampling is deterministic in (seed, iteration, position, side), so a
    rerun reproduces the result exactly.
    """
    erasure = param.kind == "bec"
    trellis = graph.trellis
    chans = [channel_density(param, q) for q in graph.rail_puncture]
    state = EdgeState.initial(graph, _repr_mode(cfg.mode, erasure))
    max_traj, mean_traj = [], []
    converged = False
    reason = "max_iterations"
    sustain = 0
    ga_se = cfg.mode == MODE_GA_SE and not erasure

    for it in range(cfg.max_iterations):
        new = [[None, None] for _ in range(graph.n_positions)]
        for t, side in graph.nodes():
            comps = state.input_components(t, side)
            if ga_se:
                info = float(np.mean([mixture_info(c) for c in comps]))
                mu = 0.0 if info <= 0.0 else mi_awgn_mu_inv(min(info, 1.0))
                comps = [[MessageDensity.gaussian(mu)] for _ in range(3)]
            rng = np.random.default_rng(np.random.SeedSequence([seed, it, t, side]))
            dens, _ = tn_update(trellis, comps, chans, cfg, rng, erasure)
            new[t][side] = dens
        state = EdgeState(graph=graph, densities=new)

        bers = np.array(
            [[[ber_of(d) for d in rails] for rails in node] for node in new]
        )
        max_ber = float(bers.max())
        mean_ber = float(bers.mean())
        max_traj.append(max_ber)
        mean_traj.append(mean_ber)

        if max_ber < cfg.target_ber:
            sustain += 1
            if sustain >= cfg.sustain_iterations:
                converged = True
                reason = "converged"
                break
        else:
            sustain = 0
        if len(mean_traj) > cfg.stall_window:
            ref = mean_traj[-1 - cfg.stall_window]
            if ref > 0.0 and (ref - mean_ber) / ref < cfg.stall_rel_improvement:
                reason = "stalled"
                break

    return DeResult(
        converged=converged,
        reason=reason,
        iterations=len(max_traj),
        max_ber=max_traj[-1],
        mean_ber=mean_traj[-1],
        max_ber_trajectory=max_traj,
        mean_ber_trajectory=mean_traj,
        position_ber=bers,
    )


@dataclass(frozen=True)
class EvalPoint:
    """One density-evolution evaluation inside a threshold search."""

    value: float
    converged: bool
    iterations: int
    reason: str
    max_ber: float
    mean_ber: float


@dataclass
class ThresholdResult:
    """Bisection estimate of a BP threshold."""

    channel: str
    mode: str
    threshold: float
    resolution: float
    bracket: tuple
    evaluations: tuple
    seed: int
    effective_rate: float
    sigma: float | None = None
    elapsed_s: float = field(default=0.0, compare=False)

    def to_dict(self):
        d = {
            "schema_version": 1,
            "channel": self.channel,
            "mode": self.mode,
            "threshold": self.threshold,
            "resolution": self.resolution,
            "bracket": list(self.bracket),
            "seed": self.seed,
            "effective_rate": self.effective_rate,
            "sigma": self.sigma,
            "elapsed_s": self.elapsed_s,
            "evaluations": [asdict(e) for e in self.evaluations],
        }
        return d


def threshold_search(
    graph: EnsembleGraph,
    channel_kind: str,
    bracket: tuple,
    cfg: DeConfig,
    seed: int = 0,
) -> ThresholdResult:
    """Bisect the BP threshold of the ensemble on the given channel.

    BEC: bisection over the erasure probability (converges below the
    threshold).  BIAWGN: bisection over Eb/N0 in dB at the ensemble's
    effective rate (converges above the threshold).  Both bracket
    endpoints are evaluated and must land on opposite sides.
    """
    if channel_kind not in ("bec", "biawgn"):
        raise ConfigError(f"unknown channel kind {channel_kind!r}")
    t0 = time.perf_counter()
    bec = channel_kind == "bec"
    rate = graph.spec.effective_rate()
    resolution = cfg.resolution_eps if bec else cfg.resolution_db
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")

    evals = []

    def run(x):
        if len(evals) >= cfg.max_evaluations:
            raise BudgetError(
                f"threshold search exceeded max_evaluations = {cfg.max_evaluations}"
            )
        param = ChannelParam("bec", x) if bec else ChannelParam("biawgn", sigma_from_ebno(x, rate))
        r = de_run(graph, param, cfg, seed=seed)
        point = EvalPoint(
            value=x,
            converged=r.converged,
            iterations=r.iterations,
            reason=r.reason,
            max_ber=r.max_ber,
            mean_ber=r.mean_ber,
        )
        evals.append(point)
        return r.converged

    good_lo = run(lo)  # BEC: expect converged; AWGN: expect not
    good_hi = run(hi)
    lo_ok = good_lo if bec else not good_lo
    hi_ok = (not good_hi) if bec else good_hi
    if not (lo_ok and hi_ok):
        raise BracketError(
            f"bracket ({lo}, {hi}) does not enclose the threshold: "
            f"lo converged={good_lo}, hi converged={good_hi}"
        )

    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        conv = run(mid)
        if conv == bec:
            # BEC: converged means the threshold is above mid.
            lo = mid
        else:
            hi = mid

    # The evaluated points must separate cleanly; bisection guarantees it.
    conv_vals = [e.value for e in evals if e.converged]
    div_vals = [e.value for e in evals if not e.converged]
    if conv_vals and div_vals:
        if bec and max(conv_vals) >= min(div_vals):
            raise ConfigError("non-monotone BEC evaluations in threshold search")
        if not bec and min(conv_vals) <= max(div_vals):
            raise ConfigError("non-monotone AWGN evaluations in threshold search")

    threshold = 0.5 * (lo + hi)
    return ThresholdResult(
        channel=channel_kind,
        mode=MODE_ERASURE if bec else cfg.mode,
        threshold=threshold,
        resolution=resolution,
        bracket=(lo, hi),
        evaluations=tuple(evals),
        seed=seed,
        effective_rate=rate,
        sigma=None if bec else sigma_from_ebno(threshold, rate),
        elapsed_s=time.perf_counter() - t0,
    )

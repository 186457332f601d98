"""Braided convolutional code ensembles.

A chain couples two identical rate-2/3 component encoders through three
length-N permutors per time instant.  At time t the upper encoder consumes
the info block u_t and (permuted) lower parity from earlier instants, and
vice versa, giving overall rate 1/3 before puncturing:

    upper inputs:  u_t,            spread(v_lower, t)   -> parity v_upper[t]
    lower inputs:  pi_u(u_t),      spread(v_upper, t)   -> parity v_lower[t]

With coupling memory m, each permuted parity block is split into m equal
sub-blocks after permutation; sub-block d feeds the partner encoder at
time t + d (d = 1..m), so positions [(d-1) N/m, d N/m) of a cross-parity
input rail at time t come from the parity emitted at t - d.  m = 0 removes
the delay entirely: it closes a zero-delay loop between the two encoders,
so the uncoupled ensemble can be analysed (density evolution only needs
the graph) but not encoded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .trellis import DEFAULT_COMPONENT, GeneratorConfig, Trellis, build_trellis, encode_block

PATTERN_NONE = "none"
PATTERN_P1 = "p1"
PATTERN_P2 = "p2"
_PATTERNS = (PATTERN_NONE, PATTERN_P1, PATTERN_P2)

BASE_RATE = 1.0 / 3.0
SIDE_UPPER = 0
SIDE_LOWER = 1

# Variable classes attached to each time instant.
VAR_INFO = "u"
VAR_UPPER = "v_upper"
VAR_LOWER = "v_lower"


@dataclass(frozen=True)
class PunctureSpec:
    """Random puncturing: pattern "none", "p1" (parity bits only) or "p2"
    (uniform over all coded bits); alpha is the overall punctured fraction."""

    pattern: str = PATTERN_NONE
    alpha: float = 0.0

    def __post_init__(self):
        if self.pattern not in _PATTERNS:
            raise ConfigError(f"unknown puncture pattern {self.pattern!r}")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in [0, 1): {self.alpha}")
        if self.pattern == PATTERN_NONE and self.alpha != 0.0:
            raise ConfigError("pattern 'none' requires alpha = 0")
        if self.pattern == PATTERN_P1 and self.alpha > 2.0 / 3.0:
            raise ConfigError("p1 cannot puncture more than the 2/3 parity fraction")

    def rail_fractions(self):
        """Punctured fraction per variable class: (info, parity)."""
        if self.pattern == PATTERN_P1:
            return 0.0, 1.5 * self.alpha
        return self.alpha, self.alpha


@dataclass(frozen=True)
class BccSpec:
    """Full static description of one braided chain."""

    block_length: int
    coupling_memory: int
    chain_length: int
    component: GeneratorConfig = DEFAULT_COMPONENT
    puncture: PunctureSpec = PunctureSpec()
    permutor_seed: int = 0

    def __post_init__(self):
        if self.block_length < 1:
            raise ConfigError("block_length must be >= 1")
        if self.coupling_memory < 0:
            raise ConfigError("coupling_memory must be >= 0")
        if self.coupling_memory >= 1:
            if self.chain_length < self.coupling_memory + 1:
                raise ConfigError("chain_length must exceed the coupling memory")
            if self.block_length % self.coupling_memory:
                raise ConfigError(
                    "block_length must be divisible by coupling_memory for edge spreading"
                )
        elif self.chain_length != 1:
            raise ConfigError("the uncoupled ensemble (m = 0) uses chain_length = 1")
        if self.component.num_inputs != 2:
            raise ConfigError("braided ensembles need rate-2/3 components (2 inputs)")

    def effective_rate(self) -> float:
        return effective_rate(BASE_RATE, self.puncture.alpha)

    def digest(self) -> str:
        """Stable short hash of everything that defines the code."""
        fb, ff = self.component.octal()
        payload = json.dumps(
            {
                "N": self.block_length,
                "m": self.coupling_memory,
                "L": self.chain_length,
                "fb": fb,
                "ff": list(ff),
                "pattern": self.puncture.pattern,
                "alpha": self.puncture.alpha,
                "permutor_seed": self.permutor_seed,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def effective_rate(base_rate: float, alpha: float) -> float:
    """Rate after discarding a fraction alpha of the coded bits."""
    if not 0.0 <= alpha < 1.0:
        raise ConfigError(f"alpha must lie in [0, 1): {alpha}")
    rate = base_rate / (1.0 - alpha)
    if rate >= 1.0:
        raise ConfigError(f"puncturing to alpha = {alpha} exceeds rate 1")
    return rate


def alpha_for_rate(base_rate: float, rate: float) -> float:
    """Punctured fraction that turns base_rate into rate."""
    if rate < base_rate or rate >= 1.0:
        raise ConfigError(f"target rate {rate} not reachable from base {base_rate}")
    return 1.0 - base_rate / rate


@dataclass
class Permutor:
    """One fixed permutation; apply() permutes, unapply() inverts."""

    perm: np.ndarray
    _inv: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=np.int64)
        if self._inv is None:
            self._inv = np.argsort(self.perm)

    @property
    def inv(self):
        return self._inv

    def apply(self, x):
        return np.asarray(x)[self.perm]

    def unapply(self, y):
        return np.asarray(y)[self._inv]


def build_permutors(spec: BccSpec) -> dict:
    """Uniform random permutors, keyed by (variable_class, t); deterministic
    in (permutor_seed, block_length, chain_length)."""
    out = {}
    for role_idx, role in enumerate((VAR_INFO, VAR_UPPER, VAR_LOWER)):
        for t in range(spec.chain_length):
            ss = np.random.SeedSequence([spec.permutor_seed, role_idx, t])
            rng = np.random.default_rng(ss)
            out[(role, t)] = Permutor(rng.permutation(spec.block_length))
    return out


@dataclass
class CodedChain:
    """One encoded chain: info blocks and both parity chains, (L, N) each.

    puncture_mask marks discarded positions, indexed [class, t, n] with
    classes ordered (info, upper parity, lower parity)."""

    spec: BccSpec
    info: np.ndarray
    parity_upper: np.ndarray
    parity_lower: np.ndarray
    puncture_mask: np.ndarray | None = None


def _spread_chunks(parity, permutors, role, t, m, n):
    """Cross-parity input rail at time t, assembled from earlier instants."""
    if m == 0:
        raise ConfigError("edge spreading requires m >= 1")
    out = np.zeros(n, dtype=np.uint8)
    c = n // m
    for d in range(1, m + 1):
        ts = t - d
        lo, hi = (d - 1) * c, d * c
        if ts >= 0:
            out[lo:hi] = permutors[(role, ts)].apply(parity[ts])[lo:hi]
    return out


def encode_chain(spec: BccSpec, info_bits) -> CodedChain:
    """Encode L info blocks through the coupled chain (m >= 1 only)."""
    if spec.coupling_memory < 1:
        raise ConfigError("the uncoupled ensemble cannot be encoded; use m >= 1")
    u = np.asarray(info_bits, dtype=np.uint8)
    L, N = spec.chain_length, spec.block_length
    if u.shape != (L, N):
        raise ConfigError(f"expected info bits of shape {(L, N)}, got {u.shape}")
    trellis = build_trellis(spec.component)
    perms = build_permutors(spec)
    m = spec.coupling_memory
    v_up = np.zeros((L, N), dtype=np.uint8)
    v_lo = np.zeros((L, N), dtype=np.uint8)
    for t in range(L):
        cross_up = _spread_chunks(v_lo, perms, VAR_LOWER, t, m, N)
        v_up[t], _ = encode_block(trellis, np.stack([u[t], cross_up]))
        cross_lo = _spread_chunks(v_up, perms, VAR_UPPER, t, m, N)
        u_perm = perms[(VAR_INFO, t)].apply(u[t])
        v_lo[t], _ = encode_block(trellis, np.stack([u_perm, cross_lo]))
    return CodedChain(spec=spec, info=u, parity_upper=v_up, parity_lower=v_lo)


def apply_puncture(chain: CodedChain, rng) -> CodedChain:
    """Mask exactly floor(alpha * 3 N L) coded bits, uniformly over the
    pattern's support (all bits for p2, parity bits for p1)."""
    spec = chain.spec
    L, N = spec.chain_length, spec.block_length
    total = 3 * L * N
    n_mask = int(np.floor(spec.puncture.alpha * total))
    mask = np.zeros((3, L, N), dtype=bool)
    if n_mask:
        if spec.puncture.pattern == PATTERN_P1:
            flat = rng.choice(2 * L * N, size=n_mask, replace=False)
            mask[1:].reshape(-1)[flat] = True
        elif spec.puncture.pattern == PATTERN_P2:
            flat = rng.choice(total, size=n_mask, replace=False)
            mask.reshape(-1)[flat] = True
        else:
            raise ConfigError("pattern 'none' cannot mask bits")
    return CodedChain(
        spec=spec,
        info=chain.info,
        parity_upper=chain.parity_upper,
        parity_lower=chain.parity_lower,
        puncture_mask=mask,
    )


@dataclass(frozen=True)
class GraphEdge:
    """One variable-to-trellis attachment in the ensemble graph."""

    var_class: str
    var_t: int
    side: int
    node_t: int
    rail: int
    offset: int
    permutor: tuple | None


@dataclass
class EnsembleGraph:
    """Protograph-with-permutors view used by density evolution.

    Node (t, side) is one component trellis; rails are 0 = info input,
    1 = cross-parity input, 2 = own parity output.  offsets lists the
    coupling delays feeding rail 1 (just (0,) when m = 0), and
    rail_puncture the punctured fraction per rail.
    """

    spec: BccSpec
    n_positions: int
    offsets: tuple
    rail_puncture: tuple
    trellis: Trellis = field(default=None, repr=False)

    def __post_init__(self):
        if self.trellis is None:
            self.trellis = build_trellis(self.spec.component)

    def nodes(self):
        return [(t, side) for t in range(self.n_positions) for side in (SIDE_UPPER, SIDE_LOWER)]

    def input_refs(self, t, side, rail):
        """Peer (t', side', rail') edges whose extrinsic feeds this rail.

        References outside [0, n_positions) are boundary positions with
        perfect knowledge."""
        other = 1 - side
        if rail == 0:
            return [(t, other, 0)]
        if rail == 1:
            return [(t - d, other, 2) for d in self.offsets]
        if rail == 2:
            return [(t + d, other, 1) for d in self.offsets]
        raise ConfigError(f"rail out of range: {rail}")

    def edges(self):
        """All variable attachments at one time instant, annotated."""
        out = []
        m = self.spec.coupling_memory
        for t in range(self.n_positions):
            out.append(GraphEdge(VAR_INFO, t, SIDE_UPPER, t, 0, 0, None))
            out.append(GraphEdge(VAR_INFO, t, SIDE_LOWER, t, 0, 0, (VAR_INFO, t)))
            out.append(GraphEdge(VAR_UPPER, t, SIDE_UPPER, t, 2, 0, None))
            out.append(GraphEdge(VAR_LOWER, t, SIDE_LOWER, t, 2, 0, None))
            offsets = self.offsets if m else (0,)
            for d in offsets:
                if m and not 0 <= t + d < self.n_positions:
                    continue
                out.append(
                    GraphEdge(VAR_UPPER, t, SIDE_LOWER, t + d, 1, d, (VAR_UPPER, t))
                )
                out.append(
                    GraphEdge(VAR_LOWER, t, SIDE_UPPER, t + d, 1, d, (VAR_LOWER, t))
                )
        return out


def build_graph(spec: BccSpec) -> EnsembleGraph:
    """Density-evolution graph of the ensemble (positions, delays, puncturing)."""
    m = spec.coupling_memory
    if m == 0:
        n_positions, offsets = 1, (0,)
    else:
        n_positions, offsets = spec.chain_length, tuple(range(1, m + 1))
    q_info, q_parity = spec.puncture.rail_fractions()
    return EnsembleGraph(
        spec=spec,
        n_positions=n_positions,
        offsets=offsets,
        rail_puncture=(q_info, q_parity, q_parity),
    )

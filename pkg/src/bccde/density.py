"""Message densities tracked by the evolution engine.

Three representations, one per tracking mode:

  FULL      an i.i.d. sample pool of LLRs (Monte-Carlo mode),
  GAUSSIAN  a symmetric Gaussian N(mu, 2 mu), stored as mu,
  ERASURE   the three-point density {+-cap w.p. 1-p, 0 w.p. p}, stored as p.

All densities are read under the all-zero-codeword convention, so ERASURE
and channel draws put their known mass on +cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParam, mi_awgn_mu, mi_awgn_mu_inv
from .errors import ConfigError
from .llr import LLR_CAP

MODE_FULL = "full"
MODE_GAUSSIAN = "gaussian"
MODE_ERASURE = "erasure"
_MODES = (MODE_FULL, MODE_GAUSSIAN, MODE_ERASURE)

_LN2 = math.log(2.0)


@dataclass
class MessageDensity:
    """One message density; exactly one of pool / mu / p is meaningful."""

    mode: str
    pool: np.ndarray | None = None
    mu: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"unknown density mode {self.mode!r}")
        if self.mode == MODE_FULL:
            if self.pool is None or len(self.pool) == 0:
                raise ConfigError("FULL density needs a non-empty sample pool")
        elif self.mode == MODE_GAUSSIAN:
            if not 0.0 <= self.mu:
                raise ConfigError("GAUSSIAN density needs mu >= 0")
        elif not 0.0 <= self.p <= 1.0:
            raise ConfigError("ERASURE density needs p in [0, 1]")

    @classmethod
    def full(cls, pool):
        return cls(MODE_FULL, pool=np.asarray(pool, dtype=np.float64))

    @classmethod
    def gaussian(cls, mu):
        return cls(MODE_GAUSSIAN, mu=float(mu))

    @classmethod
    def erasure(cls, p):
        return cls(MODE_ERASURE, p=float(p))

    @classmethod
    def perfect(cls):
        """Certain knowledge of the all-zero word (boundary condition)."""
        return cls(MODE_ERASURE, p=0.0)

    @classmethod
    def no_info(cls, mode):
        """The zero-information density in the given mode."""
        if mode == MODE_FULL:
            return cls.full(np.zeros(1))
        if mode == MODE_GAUSSIAN:
            return cls.gaussian(0.0)
        return cls.erasure(1.0)


def draw_samples(density: MessageDensity, n: int, rng) -> np.ndarray:
    """n i.i.d. samples from the density (all-zero-codeword convention)."""
    if density.mode == MODE_FULL:
        pool = density.pool
        return pool[rng.integers(0, len(pool), size=n)]
    if density.mode == MODE_GAUSSIAN:
        mu = density.mu
        if mu <= 0.0:
            return np.zeros(n)
        out = rng.normal(mu, math.sqrt(2.0 * mu), size=n)
        return np.clip(out, -LLR_CAP, LLR_CAP)
    erased = rng.random(n) < density.p
    return np.where(erased, 0.0, LLR_CAP)


def ber_of(density: MessageDensity) -> float:
    """Bit error probability of hard decisions on the density (ties split)."""
    if density.mode == MODE_FULL:
        pool = density.pool
        return float((np.count_nonzero(pool < 0) + 0.5 * np.count_nonzero(pool == 0)) / len(pool))
    if density.mode == MODE_GAUSSIAN:
        if density.mu <= 0.0:
            return 0.5
        # P(N(mu, 2 mu) < 0) = Q(sqrt(mu / 2))
        return 0.5 * math.erfc(math.sqrt(density.mu) / 2.0)
    return 0.5 * density.p


def mutual_info(density: MessageDensity) -> float:
    """The information functional I = 1 - E[log2(1 + exp(-L))]."""
    if density.mode == MODE_FULL:
        return 1.0 - float(np.logaddexp(0.0, -density.pool).mean()) / _LN2
    if density.mode == MODE_GAUSSIAN:
        return mi_awgn_mu(density.mu)
    return 1.0 - density.p


def project_gaussian(density: MessageDensity, matching: str = "mi") -> MessageDensity:
    """Project a density onto the symmetric Gaussian family.

    matching "mi" preserves the information functional; "mean" preserves
    the sample mean.  Pools carrying no positive information project to
    mu = 0 (the zero-information member).
    """
    if matching == "mi":
        info = mutual_info(density)
        mu = 0.0 if info <= 0.0 else mi_awgn_mu_inv(min(info, 1.0))
    elif matching == "mean":
        if density.mode == MODE_FULL:
            mu = max(float(density.pool.mean()), 0.0)
        elif density.mode == MODE_GAUSSIAN:
            mu = density.mu
        else:
            mu = (1.0 - density.p) * LLR_CAP
    else:
        raise ConfigError(f"unknown Gaussian matching rule {matching!r}")
    return MessageDensity.gaussian(mu)


def channel_density(param: ChannelParam, puncture_fraction: float = 0.0):
    """Sampler for channel LLRs of punctured code bits under all-zero input.

    Punctured positions carry LLR 0; the remainder follow the channel LLR
    density.  Returns a draw(n, rng) callable.
    """
    if not 0.0 <= puncture_fraction <= 1.0:
        raise ConfigError(f"puncture fraction out of [0, 1]: {puncture_fraction}")
    q = puncture_fraction
    if param.kind == "bec":
        # Puncturing a BEC input is one more erasure source.
        p_eff = q + (1.0 - q) * param.value
        dens = MessageDensity.erasure(p_eff)

        def draw(n, rng):
            return draw_samples(dens, n, rng)

        return draw

    mu = 2.0 / (param.value * param.value)
    std = math.sqrt(2.0 * mu)

    def draw(n, rng):
        out = np.clip(rng.normal(mu, std, size=n), -LLR_CAP, LLR_CAP)
        if q > 0.0:
            out[rng.random(n) < q] = 0.0
        return out

    return draw


def draw_mixture(components, n: int, rng) -> np.ndarray:
    """Samples from an equal-weight mixture, deterministic component split."""
    m = len(components)
    if m == 1:
        return draw_samples(components[0], n, rng)
    base, extra = divmod(n, m)
    parts = [draw_samples(c, base + (1 if i < extra else 0), rng) for i, c in enumerate(components)]
    return np.concatenate(parts)


def mixture_info(components) -> float:
    """Information functional of an equal-weight mixture (linear, so a mean)."""
    return float(np.mean([mutual_info(c) for c in components]))

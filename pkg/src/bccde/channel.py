"""Binary-input channel models, capacities, and rate conversions.

LLR conventions: BPSK maps bit b to 1 - 2b; the BIAWGN channel LLR is
2y / sigma^2, distributed N(2/sigma^2, 4/sigma^2) under the all-zero
word, so the mean mu fixes the whole density (variance 2 mu).  The
mutual information of that family,

    I(mu) = 1 - E[log2(1 + exp(-L))],   L ~ N(mu, 2 mu),

is evaluated by Gauss-Hermite quadrature; capacity of the BIAWGN channel
is I(2 / sigma^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .llr import LLR_CAP, clamp

_GH_X, _GH_W = np.polynomial.hermite.hermgauss(96)
_LN2 = math.log(2.0)
# I(mu) is numerically 1.0 in double precision well before this point.
_MU_MAX = 600.0


@dataclass(frozen=True)
class ChannelParam:
    """One memoryless channel: kind "bec" (value = erasure probability)
    or "biawgn" (value = noise standard deviation)."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "bec":
            if not 0.0 <= self.value <= 1.0:
                raise ConfigError(f"erasure probability out of [0, 1]: {self.value}")
        elif self.kind == "biawgn":
            if not self.value > 0.0:
                raise ConfigError(f"noise standard deviation must be positive: {self.value}")
        else:
            raise ConfigError(f"unknown channel kind {self.kind!r}")


def channel_llrs(bits, param: ChannelParam, rng) -> np.ndarray:
    """Channel LLRs for transmitted bits (BPSK), saturated to +-LLR_CAP."""
    b = np.asarray(bits, dtype=np.float64)
    x = 1.0 - 2.0 * b
    if param.kind == "bec":
        known = rng.random(b.shape) >= param.value
        return np.where(known, x * LLR_CAP, 0.0)
    sigma = param.value
    y = x + sigma * rng.standard_normal(b.shape)
    return clamp(2.0 * y / (sigma * sigma))


def mi_awgn_mu(mu: float) -> float:
    """Mutual information I(mu) of the symmetric Gaussian LLR family."""
    if mu <= 0.0:
        return 0.0
    if mu >= _MU_MAX:
        return 1.0
    samples = mu + 2.0 * math.sqrt(mu) * _GH_X
    vals = np.logaddexp(0.0, -samples)
    return 1.0 - float(_GH_W @ vals) / (math.sqrt(math.pi) * _LN2)


def mi_awgn_mu_inv(info: float) -> float:
    """Inverse of mi_awgn_mu by bisection, |I(mu) - info| <= 1e-9."""
    if info <= 0.0:
        return 0.0
    if info >= 1.0:
        return _MU_MAX
    lo, hi = 0.0, _MU_MAX
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        err = mi_awgn_mu(mid) - info
        if abs(err) <= 1e-9:
            return mid
        if err < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def capacity_biawgn(sigma: float) -> float:
    """BIAWGN capacity in bits per channel use."""
    if sigma <= 0.0:
        raise ConfigError("sigma must be positive")
    return mi_awgn_mu(2.0 / (sigma * sigma))


def entropy_h(param: ChannelParam) -> float:
    """Channel entropy: erasure probability for the BEC, 1 - capacity for BIAWGN."""
    if param.kind == "bec":
        return param.value
    return 1.0 - capacity_biawgn(param.value)


def invert_capacity(c: float) -> float:
    """sigma with capacity_biawgn(sigma) = c, bisected to |error| <= 1e-7."""
    if not 0.0 < c < 1.0:
        raise ConfigError(f"capacity must lie in (0, 1): {c}")
    lo, hi = 1e-3, 1e3
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        err = capacity_biawgn(mid) - c
        if abs(err) <= 1e-7:
            return mid
        if err > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ebno_db(sigma: float, rate: float) -> float:
    """Eb/N0 in dB for unit-energy BPSK at the given code rate."""
    if sigma <= 0.0 or rate <= 0.0:
        raise ConfigError("sigma and rate must be positive")
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


def sigma_from_ebno(db: float, rate: float) -> float:
    """Inverse of ebno_db."""
    if rate <= 0.0:
        raise ConfigError("rate must be positive")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (db / 10.0)))


def shannon_limit_db(rate: float) -> float:
    """Smallest Eb/N0 (dB) at which BIAWGN capacity reaches the rate."""
    if not 0.0 < rate < 1.0:
        raise ConfigError(f"rate must lie in (0, 1): {rate}")
    return ebno_db(invert_capacity(rate), rate)

"""Analytic AWGN threshold prediction from erasure-channel thresholds.

The working observation: for these ensembles, BP thresholds expressed as
channel entropies line up across channel families.  Three estimators are
built on it, each mapping cheap erasure-channel analysis to Eb/N0:

  ecp      map one known erasure threshold through equal capacity,
  theta-e  the erasure thresholds of the punctured family fall on the line
           eps(R_a) = 1 - theta_E R_a; predict eps, then map via ecp,
  theta-g  the same line in Gaussian channel entropy,
           h(R_a) = 1 - theta_G R_a, anchored at a measured AWGN threshold,
  mixed    interpolate the Gaussian entropy linearly in rate between the
           measured unpunctured AWGN threshold and the erasure-line
           behaviour; its zero crossing bounds the usable rate (r_max).
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import capacity_biawgn, ebno_db, invert_capacity
from .ensemble import alpha_for_rate
from .errors import ConfigError


@dataclass(frozen=True)
class PredictorInput:
    """Unpunctured reference points: the base rate plus at least one of the
    erasure threshold eps_star and the AWGN threshold sigma_star."""

    base_rate: float
    eps_star: float | None = None
    sigma_star: float | None = None

    def __post_init__(self):
        if not 0.0 < self.base_rate < 1.0:
            raise ConfigError(f"base_rate must lie in (0, 1): {self.base_rate}")
        if self.eps_star is not None and not 0.0 < self.eps_star < 1.0:
            raise ConfigError(f"eps_star must lie in (0, 1): {self.eps_star}")
        if self.sigma_star is not None and self.sigma_star <= 0.0:
            raise ConfigError(f"sigma_star must be positive: {self.sigma_star}")


@dataclass(frozen=True)
class PredictionRow:
    """One predicted operating point of the punctured family."""

    rate: float
    alpha: float
    entropy: float
    eps: float | None
    sigma: float
    ebno_db: float


def ecp(eps_star: float, rate: float) -> float:
    """Equal-capacity mapping of an erasure threshold to Eb/N0 (dB).

    Matches BIAWGN capacity to the BEC capacity 1 - eps_star and charges
    the energy at the given code rate."""
    if not 0.0 < eps_star < 1.0:
        raise ConfigError(f"eps_star must lie in (0, 1): {eps_star}")
    sigma = invert_capacity(1.0 - eps_star)
    return ebno_db(sigma, rate)


def theta_e(eps_star: float, base_rate: float) -> float:
    """Slope of the erasure-threshold line in the entropy-rate plane."""
    if not 0.0 < eps_star < 1.0:
        raise ConfigError(f"eps_star must lie in (0, 1): {eps_star}")
    if not 0.0 < base_rate < 1.0:
        raise ConfigError(f"base_rate must lie in (0, 1): {base_rate}")
    return (1.0 - eps_star) / base_rate


def _row_from_entropy(rate, alpha, h, eps=None):
    sigma = invert_capacity(1.0 - h)
    return PredictionRow(
        rate=rate, alpha=alpha, entropy=h, eps=eps, sigma=sigma, ebno_db=ebno_db(sigma, rate)
    )


def predict_bec_punctured(theta: float, base_rate: float, rates) -> list:
    """Erasure thresholds of the uniformly punctured family from the line
    eps(R_a) = 1 - theta R_a; each row also carries the equal-capacity
    Eb/N0 of the predicted erasure threshold."""
    rows = []
    for rate in rates:
        alpha = alpha_for_rate(base_rate, rate) if rate > base_rate else 0.0
        eps = 1.0 - theta * rate
        if not 0.0 < eps < 1.0:
            raise ConfigError(
                f"predicted erasure threshold {eps:.4f} at rate {rate} "
                "falls outside (0, 1); the line does not extend this far"
            )
        rows.append(_row_from_entropy(rate, alpha, eps, eps=eps))
    return rows


def theta_g(sigma_star: float, base_rate: float) -> float:
    """Slope of the Gaussian-entropy line anchored at the measured
    unpunctured AWGN threshold."""
    if sigma_star <= 0.0:
        raise ConfigError(f"sigma_star must be positive: {sigma_star}")
    if not 0.0 < base_rate < 1.0:
        raise ConfigError(f"base_rate must lie in (0, 1): {base_rate}")
    h_star = 1.0 - capacity_biawgn(sigma_star)
    return (1.0 - h_star) / base_rate


def predict_awgn_theta(theta: float, base_rate: float, rates) -> list:
    """AWGN thresholds of the punctured family from an entropy line
    h(R_a) = 1 - theta R_a (theta from theta_e or theta_g)."""
    rows = []
    for rate in rates:
        alpha = alpha_for_rate(base_rate, rate) if rate > base_rate else 0.0
        h = 1.0 - theta * rate
        if not 0.0 < h < 1.0:
            raise ConfigError(
                f"predicted channel entropy {h:.4f} at rate {rate} "
                "falls outside (0, 1); the line does not extend this far"
            )
        rows.append(_row_from_entropy(rate, alpha, h))
    return rows


@dataclass(frozen=True)
class MixedPrediction:
    """Mixed-interpolation result: rows plus the rate where the predicted
    Gaussian entropy hits zero (no threshold beyond it)."""

    rows: tuple
    r_max: float


def predict_mixed(inp: PredictorInput, rates) -> MixedPrediction:
    """Interpolate Gaussian channel entropy linearly in rate between the
    measured unpunctured AWGN threshold (entropy h_star at base_rate) and
    the erasure-line endpoint (entropy 1 - theta_E at rate 1)."""
    if inp.eps_star is None or inp.sigma_star is None:
        raise ConfigError("mixed prediction needs both eps_star and sigma_star")
    th_e = theta_e(inp.eps_star, inp.base_rate)
    h_star = 1.0 - capacity_biawgn(inp.sigma_star)
    slope = (1.0 - th_e - h_star) / (1.0 - inp.base_rate)
    if slope < 0.0:
        r_max = inp.base_rate - h_star / slope
    else:
        r_max = 1.0
    rows = []
    for rate in rates:
        alpha = alpha_for_rate(inp.base_rate, rate) if rate > inp.base_rate else 0.0
        h = h_star + (rate - inp.base_rate) * slope
        if not 0.0 < h < 1.0:
            raise ConfigError(
                f"mixed prediction gives entropy {h:.4f} at rate {rate}; "
                f"usable rates end at r_max = {r_max:.4f}"
            )
        rows.append(_row_from_entropy(rate, alpha, h))
    return MixedPrediction(rows=tuple(rows), r_max=r_max)

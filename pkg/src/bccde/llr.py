"""LLR conventions and saturation handling.

All log-likelihood ratios use L = log(P(bit=0) / P(bit=1)), so positive
values favour bit 0.  Infinite reliabilities are represented by the
saturating constant LLR_CAP; the decoders treat |L| == LLR_CAP as certainty
and keep every intermediate quantity finite.
"""

import numpy as np

# Large enough that exp(-LLR_CAP) underflows any plausible path metric sum,
# small enough that sums of a few caps stay far from double overflow.
LLR_CAP = 300.0

# Erasure messages take exactly three values: +cap (known 0), -cap (known 1),
# and 0 (erased).
_TRIT_LLR = np.array([LLR_CAP, -LLR_CAP, 0.0])


def clamp(llrs):
    """Saturate LLRs into [-LLR_CAP, LLR_CAP]."""
    return np.clip(llrs, -LLR_CAP, LLR_CAP)


def is_erasure_valued(llrs):
    """True when every entry is 0 or exactly +-LLR_CAP."""
    a = np.asarray(llrs)
    return bool(np.all((a == 0.0) | (a == LLR_CAP) | (a == -LLR_CAP)))


def llrs_to_trits(llrs):
    """Map erasure-valued LLRs to trits: 0 = known zero, 1 = known one, 2 = erased."""
    a = np.asarray(llrs)
    return np.where(a > 0, 0, np.where(a < 0, 1, 2)).astype(np.uint8)


def trits_to_llrs(trits):
    """Inverse of llrs_to_trits."""
    return _TRIT_LLR[np.asarray(trits)]

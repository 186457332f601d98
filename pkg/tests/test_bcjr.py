import itertools

import numpy as np
import pytest

from bccde.bcjr import bcjr_extrinsic, bcjr_extrinsic_batch, erasure_tables
from bccde.errors import ConfigError, DecodeContradictionError
from bccde.llr import LLR_CAP
from bccde.trellis import DEFAULT_COMPONENT, GeneratorConfig, build_trellis

from test_trellis import random_config


def exhaustive_extrinsic(tr, llrs, end_zero=False):
    """MAP extrinsic by summing over every input sequence (log domain).

    Conventions mirror the decoder: start in state 0, free (or zero) end
    state, log p(obs | bit b on rail r) contributes +llr/2 for b=0 and
    -llr/2 for b=1 up to a constant that cancels in the LLR.
    """
    R, N = llrs.shape
    E = tr.num_edges
    acc = np.full((R, N, 2), -np.inf)
    for edges in itertools.product(range(E), repeat=N):
        state = 0
        logw = 0.0
        labels = np.empty((R, N), dtype=np.uint8)
        for t, e in enumerate(edges):
            bits = tr.edge_bits[state, e]
            labels[:, t] = bits
            logw += float(np.sum(np.where(bits == 0, 0.5, -0.5) * llrs[:, t]))
            state = int(tr.next_state[state, e])
        if end_zero and state != 0:
            continue
        for r in range(R):
            for t in range(N):
                b = labels[r, t]
                acc[r, t, b] = np.logaddexp(acc[r, t, b], logw)
    app = acc[:, :, 0] - acc[:, :, 1]
    # structurally determined bits are +-inf here; the decoder saturates
    return np.clip(app - llrs, -LLR_CAP, LLR_CAP)


def test_extrinsic_matches_exhaustive_map(rng):
    """Acceptance criterion 11 at module level: 100 random trials."""
    for trial in range(100):
        k = int(rng.integers(1, 3))
        nu = int(rng.integers(1, 4))
        config = random_config(rng, k, nu)
        tr = build_trellis(config)
        n = int(rng.integers(3, 7))
        llrs = rng.normal(0.0, 3.0, size=(k + 1, n))
        got = bcjr_extrinsic(tr, llrs)
        want = exhaustive_extrinsic(tr, llrs)
        assert np.max(np.abs(got - want)) < 1e-9


def test_extrinsic_zero_end_state(rng):
    config = random_config(rng, 2, 2)
    tr = build_trellis(config)
    llrs = rng.normal(0.0, 2.0, size=(3, 5))
    got = bcjr_extrinsic(tr, llrs, start="zero", end="zero")
    want = exhaustive_extrinsic(tr, llrs, end_zero=True)
    assert np.max(np.abs(got - want)) < 1e-9


def test_batch_equals_loop(backend, rng):
    tr = build_trellis(DEFAULT_COMPONENT)
    llrs = rng.normal(0.0, 3.0, size=(7, 3, 12))
    batch = bcjr_extrinsic_batch(tr, llrs)
    for b in range(7):
        single = bcjr_extrinsic(tr, llrs[b])
        assert np.array_equal(batch[b], single)


def test_backends_agree(rng):
    from bccde import kernels

    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    tr = build_trellis(DEFAULT_COMPONENT)
    llrs = rng.normal(0.0, 4.0, size=(16, 3, 64))
    outs = {}
    for name in kernels.available_backends():
        prev = kernels.use_backend(name)
        outs[name] = bcjr_extrinsic_batch(tr, llrs)
        kernels.use_backend(prev)
    a, b = outs.values()
    assert np.max(np.abs(a - b)) < 1e-12


def test_output_is_capped(rng):
    tr = build_trellis(DEFAULT_COMPONENT)
    llrs = rng.normal(0.0, 80.0, size=(4, 3, 30))
    np.clip(llrs, -LLR_CAP, LLR_CAP, out=llrs)
    out = bcjr_extrinsic_batch(tr, llrs)
    assert np.all(np.abs(out) <= LLR_CAP)
    assert np.all(np.isfinite(out))


def test_rejects_bad_inputs(rng):
    tr = build_trellis(DEFAULT_COMPONENT)
    with pytest.raises(ConfigError):
        bcjr_extrinsic_batch(tr, np.zeros((2, 12)))  # not 3-D
    with pytest.raises(ConfigError):
        bcjr_extrinsic_batch(tr, np.zeros((2, 4, 12)))  # wrong rail count
    bad = np.zeros((1, 3, 4))
    bad[0, 0, 0] = np.inf
    with pytest.raises(ConfigError):
        bcjr_extrinsic_batch(tr, bad)
    bad[0, 0, 0] = LLR_CAP + 1
    with pytest.raises(ConfigError):
        bcjr_extrinsic_batch(tr, bad)


# --- erasure decoding ------------------------------------------------------

TRIT_TO_LLR = {0: LLR_CAP, 1: -LLR_CAP, 2: 0.0}


def enumerate_erasure_extrinsic(tr, trits):
    """Acceptance criterion 12 oracle: enumerate every input sequence and
    intersect with the observations, excluding the target position."""
    R, N = trits.shape
    E = tr.num_edges
    words = []
    for edges in itertools.product(range(E), repeat=N):
        state = 0
        labels = np.empty((R, N), dtype=np.uint8)
        for t, e in enumerate(edges):
            labels[:, t] = tr.edge_bits[state, e]
            state = int(tr.next_state[state, e])
        words.append(labels)
    words = np.stack(words)  # (W, R, N)

    known = trits != 2
    match_all = np.ones(len(words), dtype=bool)
    per_pos = np.empty((len(words), R, N), dtype=bool)
    for r in range(R):
        for t in range(N):
            if known[r, t]:
                per_pos[:, r, t] = words[:, r, t] == trits[r, t]
            else:
                per_pos[:, r, t] = True
            match_all &= per_pos[:, r, t]

    if not match_all.any():
        return None  # inconsistent observations

    out = np.empty((R, N))
    for r in range(R):
        for t in range(N):
            # consistency with everything except this position
            mask = np.ones(len(words), dtype=bool)
            for r2 in range(R):
                for t2 in range(N):
                    if (r2, t2) != (r, t):
                        mask &= per_pos[:, r2, t2]
            vals = np.unique(words[mask, r, t])
            if len(vals) == 1:
                out[r, t] = LLR_CAP if vals[0] == 0 else -LLR_CAP
            else:
                out[r, t] = 0.0
    return out


def random_erasure_observation(tr, n, rng):
    """Transmit a random codeword, erase positions at random."""
    k = tr.num_rails - 1
    inputs = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
    state = 0
    labels = np.empty((tr.num_rails, n), dtype=np.uint8)
    for t in range(n):
        e = 0
        for i in range(k):
            e |= int(inputs[i, t]) << i
        labels[:, t] = tr.edge_bits[state, e]
        state = int(tr.next_state[state, e])
    trits = labels.astype(np.int64).copy()
    erase = rng.random(trits.shape) < rng.uniform(0.2, 0.8)
    trits[erase] = 2
    return trits


def test_erasure_matches_enumeration(backend, rng):
    for config in (random_config(rng, 1, 1), DEFAULT_COMPONENT, random_config(rng, 2, 2)):
        tr = build_trellis(config)
        for trial in range(30):
            n = int(rng.integers(2, 5))
            trits = random_erasure_observation(tr, n, rng)
            llrs = np.vectorize(TRIT_TO_LLR.get)(trits).reshape(1, *trits.shape)
            got = bcjr_extrinsic_batch(tr, llrs)[0]
            want = enumerate_erasure_extrinsic(tr, trits)
            assert want is not None
            assert np.array_equal(got, want)


def test_erasure_outputs_only_trit_values(rng):
    tr = build_trellis(DEFAULT_COMPONENT)
    llrs = np.where(rng.random((40, 3, 30)) < 0.5, 0.0, LLR_CAP)
    out = bcjr_extrinsic_batch(tr, llrs)
    assert set(np.unique(out)) <= {0.0, LLR_CAP, -LLR_CAP}


def test_erasure_contradiction_raises():
    tr = build_trellis(DEFAULT_COMPONENT)
    # all-zero codeword except one known 1 on the parity rail with both
    # inputs known zero: impossible
    llrs = np.full((1, 3, 4), LLR_CAP)
    llrs[0, 2, 2] = -LLR_CAP
    with pytest.raises(DecodeContradictionError):
        bcjr_extrinsic_batch(tr, llrs)


def test_erasure_can_be_disabled(rng):
    tr = build_trellis(DEFAULT_COMPONENT)
    llrs = np.where(rng.random((2, 3, 10)) < 0.5, 0.0, LLR_CAP)
    out = bcjr_extrinsic_batch(tr, llrs, erasure=False)  # float log-MAP path
    assert np.all(np.isfinite(out))


def test_erasure_tables_cached():
    tr = build_trellis(DEFAULT_COMPONENT)
    assert erasure_tables(tr) is erasure_tables(tr)

import numpy as np
import pytest

from bccde.ensemble import (
    SIDE_LOWER,
    SIDE_UPPER,
    VAR_INFO,
    VAR_LOWER,
    VAR_UPPER,
    BccSpec,
    Permutor,
    PunctureSpec,
    alpha_for_rate,
    apply_puncture,
    build_graph,
    build_permutors,
    effective_rate,
    encode_chain,
)
from bccde.errors import ConfigError
from bccde.trellis import build_trellis, encode_block


def small_spec(**kw):
    args = dict(block_length=12, coupling_memory=1, chain_length=4)
    args.update(kw)
    return BccSpec(**args)


def test_spec_validation():
    with pytest.raises(ConfigError):
        small_spec(block_length=0)
    with pytest.raises(ConfigError):
        small_spec(coupling_memory=-1)
    with pytest.raises(ConfigError):
        small_spec(coupling_memory=2, chain_length=2)
    with pytest.raises(ConfigError):
        small_spec(block_length=10, coupling_memory=3, chain_length=8)
    with pytest.raises(ConfigError):
        small_spec(coupling_memory=0, chain_length=4)
    assert small_spec(coupling_memory=0, chain_length=1).chain_length == 1


def test_puncture_spec_validation():
    with pytest.raises(ConfigError):
        PunctureSpec("diag", 0.1)
    with pytest.raises(ConfigError):
        PunctureSpec("none", 0.2)
    with pytest.raises(ConfigError):
        PunctureSpec("p2", 1.0)
    with pytest.raises(ConfigError):
        PunctureSpec("p1", 0.7)
    assert PunctureSpec("p1", 0.4).rail_fractions() == (0.0, pytest.approx(0.6))
    assert PunctureSpec("p2", 0.4).rail_fractions() == (0.4, 0.4)


def test_rate_helpers():
    assert effective_rate(1 / 3, 0.0) == pytest.approx(1 / 3)
    assert effective_rate(1 / 3, 1 / 3) == pytest.approx(1 / 2)
    assert effective_rate(1 / 3, 0.5) == pytest.approx(2 / 3)
    assert alpha_for_rate(1 / 3, 1 / 2) == pytest.approx(1 / 3)
    assert alpha_for_rate(1 / 3, 3 / 4) == pytest.approx(5 / 9)
    with pytest.raises(ConfigError):
        alpha_for_rate(1 / 3, 0.25)
    with pytest.raises(ConfigError):
        effective_rate(1 / 3, 0.8)
    # round trip
    for rate in (0.4, 0.5, 0.6, 2 / 3, 0.75):
        assert effective_rate(1 / 3, alpha_for_rate(1 / 3, rate)) == pytest.approx(rate)


def test_spec_digest_tracks_the_definition():
    a, b = small_spec(), small_spec()
    assert a.digest() == b.digest()
    assert a.digest() != small_spec(permutor_seed=1).digest()
    assert a.digest() != small_spec(block_length=24).digest()
    assert a.digest() != small_spec(puncture=PunctureSpec("p2", 0.25)).digest()


def test_permutor_inverse(rng):
    p = Permutor(rng.permutation(50))
    x = rng.integers(0, 2, 50)
    assert np.array_equal(p.unapply(p.apply(x)), x)
    assert np.array_equal(p.apply(p.inv)[p.perm], p.perm[p.apply(p.inv)])


def test_build_permutors_deterministic_and_complete():
    spec = small_spec()
    perms = build_permutors(spec)
    again = build_permutors(spec)
    assert set(perms) == {(role, t) for role in (VAR_INFO, VAR_UPPER, VAR_LOWER)
                          for t in range(spec.chain_length)}
    for key, p in perms.items():
        assert np.array_equal(p.perm, again[key].perm)
        assert sorted(p.perm) == list(range(spec.block_length))
    other = build_permutors(small_spec(permutor_seed=7))
    assert any(not np.array_equal(perms[k].perm, other[k].perm) for k in perms)


def reference_encode(spec, u):
    """Direct re-derivation of the chain recursion, kept deliberately naive."""
    trellis = build_trellis(spec.component)
    perms = build_permutors(spec)
    L, N, m = spec.chain_length, spec.block_length, spec.coupling_memory
    c = N // m
    v_up = np.zeros((L, N), dtype=np.uint8)
    v_lo = np.zeros((L, N), dtype=np.uint8)
    for t in range(L):
        rail_up = np.zeros(N, dtype=np.uint8)
        for d in range(1, m + 1):
            if t - d >= 0:
                rail_up[(d - 1) * c:d * c] = perms[(VAR_LOWER, t - d)].apply(
                    v_lo[t - d])[(d - 1) * c:d * c]
        v_up[t], _ = encode_block(trellis, np.stack([u[t], rail_up]))
        rail_lo = np.zeros(N, dtype=np.uint8)
        for d in range(1, m + 1):
            if t - d >= 0:
                rail_lo[(d - 1) * c:d * c] = perms[(VAR_UPPER, t - d)].apply(
                    v_up[t - d])[(d - 1) * c:d * c]
        v_lo[t], _ = encode_block(
            trellis, np.stack([perms[(VAR_INFO, t)].apply(u[t]), rail_lo]))
    return v_up, v_lo


@pytest.mark.parametrize("m", [1, 2, 3])
def test_encode_chain_matches_reference(m, rng):
    spec = small_spec(block_length=12, coupling_memory=m, chain_length=5)
    u = rng.integers(0, 2, size=(5, 12), dtype=np.uint8)
    chain = encode_chain(spec, u)
    v_up, v_lo = reference_encode(spec, u)
    assert np.array_equal(chain.parity_upper, v_up)
    assert np.array_equal(chain.parity_lower, v_lo)
    assert np.array_equal(chain.info, u)


def test_encode_chain_rejects_uncoupled(rng):
    spec = small_spec(coupling_memory=0, chain_length=1)
    with pytest.raises(ConfigError):
        encode_chain(spec, rng.integers(0, 2, size=(1, 12)))
    with pytest.raises(ConfigError):
        encode_chain(small_spec(), rng.integers(0, 2, size=(3, 12)))


def test_apply_puncture_exact_counts(rng):
    spec = small_spec(block_length=60, chain_length=5,
                      puncture=PunctureSpec("p2", 0.31))
    u = rng.integers(0, 2, size=(5, 60), dtype=np.uint8)
    chain = apply_puncture(encode_chain(spec, u), rng)
    total = 3 * 5 * 60
    assert chain.puncture_mask.shape == (3, 5, 60)
    assert chain.puncture_mask.sum() == int(np.floor(0.31 * total))


def test_apply_puncture_p1_spares_info(rng):
    spec = small_spec(block_length=60, chain_length=5,
                      puncture=PunctureSpec("p1", 0.4))
    u = rng.integers(0, 2, size=(5, 60), dtype=np.uint8)
    chain = apply_puncture(encode_chain(spec, u), rng)
    assert chain.puncture_mask[0].sum() == 0
    assert chain.puncture_mask.sum() == int(np.floor(0.4 * 3 * 5 * 60))


def test_graph_uncoupled_shape():
    g = build_graph(small_spec(coupling_memory=0, chain_length=1))
    assert g.n_positions == 1
    assert g.offsets == (0,)
    assert g.input_refs(0, SIDE_UPPER, 1) == [(0, SIDE_LOWER, 2)]
    assert g.input_refs(0, SIDE_LOWER, 2) == [(0, SIDE_UPPER, 1)]
    assert g.input_refs(0, SIDE_UPPER, 0) == [(0, SIDE_LOWER, 0)]


def test_graph_coupled_references():
    g = build_graph(small_spec(block_length=12, coupling_memory=2, chain_length=6))
    assert g.n_positions == 6
    assert g.offsets == (1, 2)
    # rail 1 at time t reads parity emitted at t-1 and t-2 by the other side
    assert g.input_refs(3, SIDE_UPPER, 1) == [(2, SIDE_LOWER, 2), (1, SIDE_LOWER, 2)]
    # parity emitted at t is consumed at t+1 and t+2
    assert g.input_refs(3, SIDE_LOWER, 2) == [(4, SIDE_UPPER, 1), (5, SIDE_UPPER, 1)]
    # boundary references run off the chain and are resolved by the caller
    assert g.input_refs(0, SIDE_UPPER, 1) == [(-1, SIDE_LOWER, 2), (-2, SIDE_LOWER, 2)]
    with pytest.raises(ConfigError):
        g.input_refs(0, SIDE_UPPER, 3)


def test_graph_rail_puncture():
    g = build_graph(small_spec(puncture=PunctureSpec("p1", 0.3)))
    assert g.rail_puncture == (0.0, pytest.approx(0.45), pytest.approx(0.45))
    g2 = build_graph(small_spec(puncture=PunctureSpec("p2", 0.3)))
    assert g2.rail_puncture == (0.3, 0.3, 0.3)


def test_graph_edges_cover_all_attachments():
    spec = small_spec(block_length=12, coupling_memory=2, chain_length=5)
    g = build_graph(spec)
    edges = g.edges()
    # every (node, rail) pairing seen by input_refs shows up as an edge
    info_edges = [e for e in edges if e.var_class == VAR_INFO]
    assert len(info_edges) == 2 * g.n_positions
    cross = [e for e in edges if e.rail == 1]
    for e in cross:
        assert e.node_t == e.var_t + e.offset
        assert 0 <= e.node_t < g.n_positions
        assert e.permutor == (e.var_class, e.var_t)
    own = [e for e in edges if e.rail == 2]
    assert all(e.var_t == e.node_t for e in own)
    assert all((e.var_class == VAR_UPPER) == (e.side == SIDE_UPPER) for e in own)

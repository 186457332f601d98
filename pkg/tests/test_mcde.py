import numpy as np
import pytest

from bccde.channel import ChannelParam
from bccde.density import MODE_ERASURE, MessageDensity, channel_density
from bccde.ensemble import BccSpec, build_graph
from bccde.errors import (
    BracketError,
    BudgetError,
    ConfigError,
    LlrContradictionError,
)
from bccde.llr import LLR_CAP
from bccde.mcde import (
    DeConfig,
    EdgeState,
    de_run,
    threshold_search,
    tn_update,
    vn_update,
)

# Deliberately tiny engine settings: the uncoupled BEC ensemble threshold
# sits near 0.554, far from the probe points used here, so coarse sampling
# still lands on the right side every time.
TOY_BEC = DeConfig(
    mode="mc",
    pool_size=2000,
    seq_length=500,
    blocks_per_batch=4,
    max_batches=3,
    stability_tol=1e-2,
    max_iterations=200,
    target_ber=1e-4,
    sustain_iterations=3,
    stall_window=30,
    stall_rel_improvement=1e-3,
    resolution_eps=0.02,
)

TOY_AWGN = DeConfig(
    mode="ga-se",
    pool_size=1200,
    seq_length=300,
    blocks_per_batch=4,
    max_batches=2,
    stability_tol=1e-2,
    max_iterations=120,
    target_ber=2e-3,
    sustain_iterations=2,
    stall_window=25,
    stall_rel_improvement=1e-3,
    resolution_db=0.25,
)


def uncoupled_graph():
    return build_graph(BccSpec(block_length=500, coupling_memory=0, chain_length=1))


def test_config_validation():
    with pytest.raises(ConfigError):
        DeConfig(mode="exact")
    with pytest.raises(ConfigError):
        DeConfig(pool_size=0)
    with pytest.raises(ConfigError):
        DeConfig(stability_tol=0.0)
    with pytest.raises(ConfigError):
        DeConfig(ga_matching="mode")


def test_vn_update_sums_and_clamps():
    out = vn_update([1.0, -2.0, 200.0], [0.5, -1.0, 200.0])
    assert out.tolist() == [1.5, -3.0, LLR_CAP]
    with pytest.raises(LlrContradictionError):
        vn_update([LLR_CAP], [-LLR_CAP])


def test_edge_state_boundaries():
    graph = uncoupled_graph()
    state = EdgeState.initial(graph, MODE_ERASURE)
    assert state.get(0, 0, 1).p == 1.0
    assert state.get(-1, 0, 2).p == 0.0  # off-chain reads as perfect
    assert state.get(5, 1, 0).p == 0.0
    comps = state.input_components(0, 0)
    assert len(comps) == 3 and all(len(c) == 1 for c in comps)


def test_tn_update_perfect_inputs_stay_perfect(rng):
    graph = uncoupled_graph()
    chans = [channel_density(ChannelParam("bec", 0.0), 0.0)] * 3
    comps = [[MessageDensity.perfect()] for _ in range(3)]
    dens, diag = tn_update(graph.trellis, comps, chans, TOY_BEC, rng, erasure=True)
    assert all(d.p == 0.0 for d in dens)
    assert diag["ber"].max() == 0.0


def test_tn_update_no_info_inputs(rng):
    graph = uncoupled_graph()
    chans = [channel_density(ChannelParam("bec", 1.0), 0.0)] * 3
    comps = [[MessageDensity.erasure(1.0)] for _ in range(3)]
    dens, diag = tn_update(graph.trellis, comps, chans, TOY_BEC, rng, erasure=True)
    assert all(d.p == 1.0 for d in dens)
    assert diag["ber"].max() == 0.5


def test_de_run_bec_below_threshold_converges():
    r = de_run(uncoupled_graph(), ChannelParam("bec", 0.45), TOY_BEC, seed=3)
    assert r.converged and r.reason == "converged"
    assert r.max_ber < TOY_BEC.target_ber
    assert r.iterations == len(r.max_ber_trajectory)


def test_de_run_bec_above_threshold_stalls():
    r = de_run(uncoupled_graph(), ChannelParam("bec", 0.62), TOY_BEC, seed=3)
    assert not r.converged and r.reason == "stalled"
    assert r.max_ber > 0.01


def test_de_run_is_deterministic_in_seed():
    graph = uncoupled_graph()
    a = de_run(graph, ChannelParam("bec", 0.50), TOY_BEC, seed=11)
    b = de_run(graph, ChannelParam("bec", 0.50), TOY_BEC, seed=11)
    assert a.max_ber_trajectory == b.max_ber_trajectory
    assert a.mean_ber_trajectory == b.mean_ber_trajectory
    c = de_run(graph, ChannelParam("bec", 0.50), TOY_BEC, seed=12)
    assert a.max_ber_trajectory != c.max_ber_trajectory


def test_threshold_search_bec_toy():
    res = threshold_search(uncoupled_graph(), "bec", (0.40, 0.70), TOY_BEC, seed=5)
    assert res.channel == "bec" and res.mode == MODE_ERASURE
    assert 0.48 < res.threshold < 0.64
    assert res.bracket[1] - res.bracket[0] <= res.resolution + 1e-12
    assert res.bracket[0] <= res.threshold <= res.bracket[1]
    assert len(res.evaluations) >= 3
    assert res.sigma is None
    d = res.to_dict()
    assert d["schema_version"] == 1
    assert len(d["evaluations"]) == len(res.evaluations)
    # converged evaluations all sit below every diverged one
    conv = [e.value for e in res.evaluations if e.converged]
    div = [e.value for e in res.evaluations if not e.converged]
    assert max(conv) < min(div)


def test_threshold_search_awgn_toy():
    res = threshold_search(uncoupled_graph(), "biawgn", (0.2, 2.8), TOY_AWGN, seed=5)
    assert res.channel == "biawgn" and res.mode == "ga-se"
    assert 0.4 < res.threshold < 2.2
    assert res.sigma is not None and res.sigma > 0
    # AWGN converges above the threshold
    conv = [e.value for e in res.evaluations if e.converged]
    div = [e.value for e in res.evaluations if not e.converged]
    assert min(conv) > max(div)


def test_threshold_search_bad_brackets():
    graph = uncoupled_graph()
    with pytest.raises(BracketError):
        threshold_search(graph, "bec", (0.7, 0.4), TOY_BEC)
    with pytest.raises(BracketError):
        # both endpoints converge: no threshold enclosed
        threshold_search(graph, "bec", (0.30, 0.40), TOY_BEC, seed=5)
    with pytest.raises(ConfigError):
        threshold_search(graph, "qam", (0.1, 0.9), TOY_BEC)


def test_threshold_search_budget():
    cfg = DeConfig(**{**TOY_BEC.__dict__, "max_evaluations": 2})
    with pytest.raises(BudgetError):
        threshold_search(uncoupled_graph(), "bec", (0.40, 0.70), cfg, seed=5)


def test_de_run_ga_modes_converge_at_high_snr():
    graph = uncoupled_graph()
    for mode in ("ga", "ga-se"):
        cfg = DeConfig(**{**TOY_AWGN.__dict__, "mode": mode})
        r = de_run(graph, ChannelParam("biawgn", 0.7), cfg, seed=2)
        assert r.converged, mode
        assert r.mean_ber_trajectory[0] > r.mean_ber_trajectory[-1]


def test_de_run_coupled_chain_wave():
    # Short coupled chain slightly above the uncoupled threshold: the
    # boundary wave must still clear it on the BEC.
    spec = BccSpec(block_length=500, coupling_memory=1, chain_length=6)
    r = de_run(build_graph(spec), ChannelParam("bec", 0.58), TOY_BEC, seed=7)
    assert r.converged

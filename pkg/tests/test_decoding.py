import numpy as np
import pytest

from cliquecut import (
    CliqueLossParams,
    CliquePenaltyObjective,
    CutObjective,
    Graph,
    VolumeConstraint,
    clique_loss,
    conductance,
    cut_weight,
    decode_best_of_k,
    decode_clique_sweep,
    decode_conditional,
    decode_cut_with_volume,
    decode_maxcut_half,
    expected_cut,
    grow_to_maximal,
    is_clique,
    set_weight,
    volume,
)
from cliquecut.decoding import _visit_order

from helpers import complete_graph, path_graph, random_graph, two_triangles


def _clique_objective(graph, gamma=None, beta=None):
    params = CliqueLossParams.for_graph(graph, gamma=gamma, beta=beta)
    return CliquePenaltyObjective(graph, params), params


def test_visit_orders():
    p = np.array([0.5, 0.9, 0.5, 0.1])
    assert _visit_order(p, "prob").tolist() == [1, 0, 2, 3]
    assert _visit_order(p, "index").tolist() == [0, 1, 2, 3]
    with pytest.raises(ValueError, match="unknown visit order"):
        _visit_order(p, "random")


def test_conditional_path_monotone_and_consistent():
    rng = np.random.default_rng(42)
    for trial in range(40):
        n = int(rng.integers(2, 15))
        g = random_graph(rng, n, density=0.4, weighted=True)
        p = rng.random(n)
        objective, params = _clique_objective(g)
        members, trace = decode_conditional(g, p, objective)
        path = trace.expectation_path
        assert path.shape == (n + 1,)
        assert path[0] == pytest.approx(clique_loss(g, p, params).value, abs=1e-9)
        assert np.all(np.diff(path) <= 1e-9)
        # Final entry is the loss of the integral indicator.
        ind = np.zeros(n)
        ind[list(members.indices())] = 1.0
        assert path[-1] == pytest.approx(clique_loss(g, ind, params).value, abs=1e-9)


def test_conditional_integral_input_returns_support():
    g = two_triangles()
    p = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
    objective, _ = _clique_objective(g)
    members, trace = decode_conditional(g, p, objective)
    assert sorted(members.indices()) == [0, 2, 4]
    assert trace.expectation_path[0] == pytest.approx(trace.expectation_path[-1])


def test_conditional_trace_json():
    g = complete_graph(3)
    objective, _ = _clique_objective(g)
    _, trace = decode_conditional(g, np.array([0.9, 0.5, 0.1]), objective)
    data = trace.to_json()
    assert data["visit_order"] == [0, 1, 2]
    assert len(data["decisions"]) == 3
    assert len(data["expectation_path"]) == 4
    assert all(isinstance(v, float) for v in data["expectation_path"])


def test_maxcut_half_guarantee():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(2, 20))
        g = random_graph(rng, n, density=0.4, weighted=True)
        if g.num_edges == 0:
            continue
        side = decode_maxcut_half(g)
        assert cut_weight(g, side) >= 0.5 * g.total_weight - 1e-9


def test_maxcut_half_even_cycle_is_exact():
    # 4-cycle: alternating sides cut all four edges.
    g = Graph(4, [0, 1, 2, 0], [1, 2, 3, 3], [1.0] * 4)
    side = decode_maxcut_half(g)
    assert cut_weight(g, side) == pytest.approx(4.0)


def test_sweep_always_returns_clique():
    rng = np.random.default_rng(13)
    for _ in range(60):
        n = int(rng.integers(1, 20))
        g = random_graph(rng, n, density=0.5, weighted=True)
        p = rng.random(n)
        members = decode_clique_sweep(g, p)
        assert is_clique(g, members)


def test_sweep_known_example():
    # Triangle 0-1-2 plus a pendant 3 attached to 0.  Starting from the
    # pendant's side the sweep keeps {3, 0} and must reject 1 and 2.
    g = Graph(4, [0, 0, 1, 0], [1, 2, 2, 3], [1.0] * 4)
    members = decode_clique_sweep(g, np.array([0.8, 0.7, 0.6, 0.9]))
    assert sorted(members.indices()) == [0, 3]
    # Tilted toward the triangle instead.
    members = decode_clique_sweep(g, np.array([0.9, 0.8, 0.7, 0.1]))
    assert sorted(members.indices()) == [0, 1, 2]


def test_grow_to_maximal():
    g = complete_graph(5, weight=0.5)
    grown = grow_to_maximal(g, [2])
    assert sorted(grown.indices()) == [0, 1, 2, 3, 4]
    # Already maximal stays put.
    tri = two_triangles()
    grown = grow_to_maximal(tri, [0, 1, 2])
    assert sorted(grown.indices()) == [0, 1, 2]
    # From empty: first pick is the best-gain tie at index 0, then greedy.
    grown = grow_to_maximal(tri, [])
    assert is_clique(tri, grown)
    assert len(grown) == 3


def test_grow_to_maximal_prefers_weight():
    # Node 0 can extend with 1 (weight 1.0) or 2 (weight 0.4): picks 1.
    g = Graph(3, [0, 0], [1, 2], [1.0, 0.4])
    grown = grow_to_maximal(g, [0])
    assert sorted(grown.indices()) == [0, 1]


def test_grow_to_maximal_never_shrinks_weight():
    rng = np.random.default_rng(29)
    for _ in range(40):
        n = int(rng.integers(2, 16))
        g = random_graph(rng, n, density=0.5, weighted=True)
        p = rng.random(n)
        base = decode_clique_sweep(g, p)
        grown = grow_to_maximal(g, base)
        assert is_clique(g, grown)
        assert set(base.indices()) <= set(grown.indices())
        assert set_weight(g, grown) >= set_weight(g, base) - 1e-12


def test_volume_decode_respects_cap_and_seed():
    g = two_triangles()
    interval = VolumeConstraint(5.0, 9.0)
    rng = np.random.default_rng(0)
    for _ in range(30):
        p = rng.random(6)
        for seed in range(6):
            res = decode_cut_with_volume(g, p, interval, seed)
            assert seed in res.node_set
            assert volume(g, res.node_set) <= interval.upper + 1e-12
            assert res.lower_met == (volume(g, res.node_set) >= interval.lower)


def test_volume_decode_finds_the_triangle():
    g = two_triangles()
    p = np.array([0.9, 0.9, 0.9, 0.1, 0.1, 0.1])
    res = decode_cut_with_volume(g, p, VolumeConstraint(5.0, 9.0), 0)
    assert sorted(res.node_set.indices()) == [0, 1, 2]
    assert res.lower_met
    assert conductance(g, res.node_set) == pytest.approx(1.0 / 7.0)


def test_volume_decode_cap_overrides_forced_ones():
    # Everyone at probability 1 would bust any modest cap; the override
    # keeps the volume legal even though every node is "forced" in.
    g = complete_graph(4)  # degrees all 3
    res = decode_cut_with_volume(g, np.ones(4), VolumeConstraint(2.0, 7.0), 1)
    assert volume(g, res.node_set) <= 7.0
    assert 1 in res.node_set


def test_volume_decode_seed_too_heavy_raises():
    g = complete_graph(4)
    with pytest.raises(ValueError, match="exceeds the volume upper bound"):
        decode_cut_with_volume(g, np.full(4, 0.5), VolumeConstraint(0.0, 2.0), 0)
    with pytest.raises(ValueError, match="out of range"):
        decode_cut_with_volume(g, np.full(4, 0.5), VolumeConstraint(0.0, 9.0), 7)


def test_volume_decode_trace_shape():
    g = path_graph(5)
    res = decode_cut_with_volume(g, np.full(5, 0.5), VolumeConstraint(1.0, 6.0), 2)
    assert res.trace.visit_order[0] == 2
    assert res.trace.decisions[0]
    assert res.trace.expectation_path.shape == (6,)
    assert sorted(res.trace.visit_order.tolist()) == [0, 1, 2, 3, 4]


def test_best_of_k_improves_and_reproduces():
    g = complete_graph(5)
    p = np.full(5, 0.6)
    objective, params = _clique_objective(g)
    rng = np.random.default_rng(3)
    best = decode_best_of_k(g, p, objective, 64, rng)
    ind = np.zeros(5)
    ind[list(best.indices())] = 1.0
    # With 64 draws on K5 the best draw should do at least as well as the mean.
    assert clique_loss(g, ind, params).value <= clique_loss(g, p, params).value + 1e-9

    a = decode_best_of_k(g, p, objective, 8, np.random.default_rng(11))
    b = decode_best_of_k(g, p, objective, 8, np.random.default_rng(11))
    assert sorted(a.indices()) == sorted(b.indices())
    with pytest.raises(ValueError, match="at least 1"):
        decode_best_of_k(g, p, objective, 0, rng)


def test_cut_objective_maximize_sign():
    g = path_graph(3)
    p = np.array([0.5, 0.5, 0.5])
    mini = CutObjective(g)
    maxi = CutObjective(g, maximize=True)
    assert mini.start(p) == pytest.approx(expected_cut(g, p))
    assert maxi.start(p) == pytest.approx(-expected_cut(g, p))

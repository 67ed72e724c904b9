"""Acceptance gate: one test per release criterion, A1 through A11.

Each test prints a single ``[A#] PASS/FAIL`` verdict line to the real stderr
so the verdicts stay visible under pytest's output capture.  Tolerances and
instance counts are pinned here on purpose; loosening them is a release
decision, not a test fix.
"""

import itertools
import json
import math
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from cliquecut import (
    CliqueLossParams,
    CliqueLossSpec,
    CliquePenaltyObjective,
    SolveConfig,
    VolumeConstraint,
    box_certificate,
    brute_force_expectation,
    brute_force_max_clique,
    clique_loss,
    clique_violation_bound,
    conductance,
    cut_loss,
    cut_weight,
    decode_conditional,
    decode_maxcut_half,
    expected_cut,
    expected_set_weight,
    expected_volume,
    gen_gnp,
    gen_planted_clique,
    is_clique,
    mpnn_forward,
    optimize_direct,
    penalty_certificate,
    rescale_to_target,
    set_weight,
    solve_local_partition,
    solve_max_clique,
    to_edge_list_text,
    uniform_random_baseline,
    volume,
)
from cliquecut.cli import main as cli_main
from cliquecut.models import MpnnParams, mpnn_backward

from helpers import naive_max_clique, random_graph, two_triangles


def _announce(tag: str, ok: bool, detail: str) -> None:
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} {detail}", file=sys.__stderr__, flush=True)


def _close(analytic: float, reference: float, tol: float) -> bool:
    return abs(analytic - reference) <= tol * max(1.0, abs(analytic), abs(reference))


# ---------------------------------------------------------------------------


def test_a01_expectation_oracles_match_enumeration():
    """Closed-form expectations agree with exhaustive 2^n enumeration."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    failures = []
    checks = 0
    for i in range(200):
        n = int(rng.integers(2, 13))
        p_edge = float(rng.choice([0.3, 0.5, 0.8]))
        if i % 2 == 0:
            g = gen_gnp(n, p_edge, rng)
        else:
            g = random_graph(rng, n, density=p_edge, weighted=True)
        p = rng.random(n)
        values = [
            (expected_set_weight(g, p), "set_weight"),
            (expected_cut(g, p), "cut_weight"),
            (expected_volume(g, p), "volume"),
            (clique_violation_bound(g, p), "complement_weight"),
        ]
        for got, objective in values:
            exact = brute_force_expectation(g, p, objective)
            checks += 1
            # Relative above unit scale, absolute below it: the closed forms
            # cancel terms (complete graph -> complement weight exactly 0)
            # and pure relative error is meaningless against a true zero.
            if abs(got - exact) > 1e-10 * max(1.0, abs(exact)):
                failures.append((i, objective, got, exact))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    _announce("A1", ok, f"expectation oracles: {checks} comparisons at rel 1e-10 in {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed < 60.0


def test_a02_gradients_match_finite_differences():
    """Analytic loss gradients and network backprop agree with central differences."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    h = 1e-6
    failures = []
    for point in range(100):
        n = int(rng.integers(2, 11))
        g = random_graph(rng, n, density=0.5, weighted=True)
        p = rng.uniform(0.05, 0.95, n)
        beta = float(rng.uniform(0.5, 6.0))
        gamma = beta * float(rng.uniform(0.1, 1.0))
        params = CliqueLossParams(gamma=gamma, beta=beta)
        for label, fn in (
            ("clique", lambda q: clique_loss(g, q, params)),
            ("cut", lambda q: cut_loss(g, q)),
        ):
            grad = fn(p).gradient
            for i in range(n):
                up, dn = p.copy(), p.copy()
                up[i] += h
                dn[i] -= h
                fd = (fn(up).value - fn(dn).value) / (2.0 * h)
                if not _close(grad[i], fd, 1e-5):
                    failures.append((point, label, i, grad[i], fd))

    # Backprop through the network; probed at a generic point because zero
    # biases park masked nodes exactly on a ReLU kink.
    for trial in range(10):
        net = MpnnParams.init(rng, hidden=5, layers=2)
        for w in net.weights.values():
            w += 0.05 * rng.standard_normal(w.shape)
        g = random_graph(rng, int(rng.integers(5, 9)), density=0.6, weighted=True)
        seed = int(rng.integers(g.n))
        dL_dp = rng.standard_normal(g.n)
        _, cache = mpnn_forward(g, net, seed, want_cache=True)
        grads = mpnn_backward(g, net, cache, dL_dp)

        def value(ps: MpnnParams) -> float:
            return float(mpnn_forward(g, ps, seed) @ dL_dp)

        for key, w in net.weights.items():
            flat = w.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up_v = value(net)
                flat[j] = orig - h
                dn_v = value(net)
                flat[j] = orig
                fd = (up_v - dn_v) / (2.0 * h)
                if not _close(grads[key].reshape(-1)[j], fd, 1e-4):
                    failures.append((trial, key, j, grads[key].reshape(-1)[j], fd))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    _announce("A2", ok, f"gradient checks: losses at 1e-5, backprop at 1e-4, h=1e-6, {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed < 60.0


def test_a03_maxcut_decode_beats_half_total_weight():
    """The derandomized uniform cut never drops below half the edge weight."""
    rng = np.random.default_rng(303)
    worst = np.inf
    failures = 0
    for i in range(1000):
        n = int(rng.integers(2, 201))
        density = float(rng.uniform(0.02, 0.6))
        g = random_graph(rng, n, density=density, weighted=bool(i % 3 == 0))
        side = decode_maxcut_half(g)
        margin = cut_weight(g, side.mask) - 0.5 * g.total_weight
        worst = min(worst, margin)
        if margin < -1e-9 * max(1.0, g.total_weight):
            failures += 1
    ok = failures == 0
    _announce("A3", ok, f"max-cut half guarantee: 1000 graphs, worst margin {worst:+.3g}")
    assert failures == 0


def test_a04_conditional_decode_never_increases_expectation():
    """Expectation traces are monotone and the integral value beats the start."""
    rng = np.random.default_rng(404)
    failures = []
    for i in range(500):
        n = int(rng.integers(2, 14))
        g = random_graph(rng, n, density=float(rng.uniform(0.2, 0.8)), weighted=True)
        p = rng.random(n)
        beta = float(rng.uniform(0.5, 8.0))
        gamma = beta * float(rng.uniform(0.1, 1.0))
        params = CliqueLossParams(gamma=gamma, beta=beta)
        start = clique_loss(g, p, params).value
        members, trace = decode_conditional(g, p, CliquePenaltyObjective(g, params))
        if np.any(np.diff(trace.expectation_path) > 1e-9):
            failures.append((i, "trace increased"))
        ind = np.zeros(n)
        ind[list(members.indices())] = 1.0
        final = clique_loss(g, ind, params).value
        if final > start + 1e-9:
            failures.append((i, "integral value above start", final, start))
    ok = not failures
    _announce("A4", ok, "derandomization soundness: 500 monotone traces, slack 1e-9")
    assert not failures, failures[:5]


def test_a05_every_decoded_set_is_a_clique():
    """1000 fuzzed solves; non-clique output anywhere is a hard failure.

    The rest of the suite asserts the same invariant on every clique solve it
    performs, so a regression cannot hide outside this fuzz loop.
    """
    rng = np.random.default_rng(505)
    bad = 0
    for i in range(1000):
        n = int(rng.integers(1, 21))
        g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.7)), weighted=bool(i % 2))
        config = SolveConfig(
            producer=("direct", "uniform")[i % 2],
            decode=("hybrid", "conditional", "sweep")[i % 3],
            restarts=1,
            steps=(0, 6)[i % 2],
            opt_beta=(1.0, 4.0)[(i // 2) % 2],
            seed=i,
        )
        result = solve_max_clique(g, config)
        if not is_clique(g, result.node_indices):
            bad += 1
    ok = bad == 0
    _announce("A5", ok, f"clique validity: {1000 - bad}/1000 fuzzed solves decoded to cliques")
    assert bad == 0


def test_a06_rescaling_hits_target_fast_and_monotonically():
    """Clamp-and-rescale lands on reachable targets within n rounds."""
    rng = np.random.default_rng(606)
    failures = []
    for i in range(1000):
        n = int(rng.integers(1, 51))
        a = rng.uniform(0.0, 2.0, n)
        if a.sum() == 0.0:
            a[int(rng.integers(n))] = 1.0
        p0 = rng.uniform(0.01, 1.0, n)
        b = float(rng.uniform(0.05, 1.0)) * float(a.sum())
        q, info = rescale_to_target(p0, a, b, with_info=True)
        if abs(float(a @ q) - b) > 1e-9 * b:
            failures.append((i, "missed target"))
        if info.iterations > n:
            failures.append((i, "too many iterations"))
        for earlier, later in zip(info.saturated_history, info.saturated_history[1:]):
            if not np.all(later[earlier]):
                failures.append((i, "saturated set shrank"))
                break
    ok = not failures
    _announce("A6", ok, "rescaling: 1000 triples, |sum a q - b| <= 1e-9 b within n rounds")
    assert not failures, failures[:5]


def _mc_clique_frequency(g, p, gamma, bound, rng, samples):
    """Vectorized success frequency of (cost <= bound and S is a clique)."""
    draws = rng.random((samples, g.n)) < p
    inside = draws[:, g.edge_u] & draws[:, g.edge_v]
    weight_in = inside @ g.edge_w
    sizes = draws.sum(axis=1)
    wanted_pairs = sizes * (sizes - 1) // 2
    present_pairs = inside.sum(axis=1)
    happy = (gamma - weight_in <= bound + 1e-9) & (present_pairs == wanted_pairs)
    return float(happy.mean())


def test_a07_certificates_hold_under_monte_carlo():
    """Fifty penalty and fifty box claims survive 1e5-sample frequency checks."""
    rng = np.random.default_rng(707)
    samples = 100_000
    failures = []

    penalty_count = 0
    attempts = 0
    while penalty_count < 50 and attempts < 300:
        attempts += 1
        n = int(rng.integers(6, 12))
        g = random_graph(rng, n, density=0.6, weighted=False)
        if g.num_edges == 0:
            continue
        # Concentrate mass on an exact maximum clique with a little stray
        # probability elsewhere: the regime the penalty bound is meant for.
        _, members = naive_max_clique(g)
        p = rng.uniform(0.0, 0.005, n)
        p[list(members)] = 0.95
        params = CliqueLossParams.for_graph(g)
        loss = max(clique_loss(g, p, params).value, 0.0)
        if loss >= params.beta:
            continue
        t = 0.5 * (1.0 - loss / params.beta)
        cert = penalty_certificate(loss, params.beta, t)
        if cert.vacuous:
            continue
        freq = _mc_clique_frequency(g, p, params.gamma, cert.bound, rng, samples)
        slack = 3.0 * math.sqrt(t * (1.0 - t) / samples)
        if freq < t - slack:
            failures.append(("penalty", attempts, freq, t))
        penalty_count += 1

    box_count = 0
    attempts = 0
    while box_count < 50 and attempts < 300:
        attempts += 1
        n = int(rng.integers(15, 26))
        g = random_graph(rng, n, density=0.5, weighted=True)
        if g.num_edges == 0:
            continue
        p = rng.uniform(0.3, 0.7, n)
        deg = g.degree
        mid = float(deg @ p)
        half_width = 1.5 * math.sqrt(float(deg @ deg))
        if mid - half_width <= 0.0:
            continue
        interval = VolumeConstraint(mid - half_width, mid + half_width)
        cert = box_certificate(expected_cut(g, p), 0.9, deg, interval, p=p)
        if cert.vacuous:
            continue
        hits = 0
        violations = 0
        for start in range(0, samples, 10_000):
            draws = rng.random((10_000, n)) < p
            vols = draws @ deg
            split = draws[:, g.edge_u] ^ draws[:, g.edge_v]
            cuts = split @ g.edge_w
            inside = (vols >= interval.lower) & (vols <= interval.upper)
            hits += int(((cuts <= cert.bound + 1e-9) & inside).sum())
            violations += int((~inside).sum())
        freq = hits / samples
        viol = violations / samples
        s = cert.success_prob
        if freq < s - 3.0 * math.sqrt(s * (1.0 - s) / samples):
            failures.append(("box success", attempts, freq, s))
        hoeff = cert.hoeffding_term
        viol_slack = 3.0 * math.sqrt(max(viol * (1.0 - viol), hoeff * (1.0 - hoeff)) / samples)
        if viol > hoeff + viol_slack:
            failures.append(("box violation", attempts, viol, hoeff))
        box_count += 1

    ok = not failures and penalty_count == 50 and box_count == 50
    _announce(
        "A7", ok,
        f"certificate soundness: {penalty_count} penalty + {box_count} box claims, 1e5 samples each",
    )
    assert penalty_count == 50 and box_count == 50
    assert not failures, failures[:5]


def test_a08_direct_producer_beats_uniform_on_gnp():
    """Optimized distributions out-solve uniform random ones, same pipeline."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    direct_ratios = []
    uniform_ratios = []
    for i in range(20):
        g = gen_gnp(50, 0.5, rng)
        optimal = set_weight(g, brute_force_max_clique(g).mask)
        config = SolveConfig(seed=i)
        direct = solve_max_clique(g, config)
        uniform = uniform_random_baseline(g, config)
        direct_ratios.append(direct.objective / optimal)
        uniform_ratios.append(uniform.objective / optimal)
    mean_direct = float(np.mean(direct_ratios))
    mean_uniform = float(np.mean(uniform_ratios))
    elapsed = time.perf_counter() - t0
    ok = mean_direct > mean_uniform and elapsed < 600.0
    _announce(
        "A8", ok,
        f"producer ordering: direct {mean_direct:.4f} > uniform {mean_uniform:.4f} "
        f"over 20 G(50,0.5), {elapsed:.0f}s",
    )
    assert mean_direct > mean_uniform
    assert elapsed < 600.0


def test_a09_planted_cliques_are_recovered():
    """Median approximation ratio >= 0.9 on planted instances with a verified optimum."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    ratios = []
    for i in range(20):
        g, planted = gen_planted_clique(50, 10, 0.3, rng)
        optimal = set_weight(g, brute_force_max_clique(g).mask)
        assert optimal >= set_weight(g, planted.mask) - 1e-9
        result = solve_max_clique(g, SolveConfig(seed=i))
        ratios.append(result.objective / optimal)
    median = float(np.median(ratios))
    elapsed = time.perf_counter() - t0
    ok = median >= 0.9 and elapsed < 600.0
    _announce("A9", ok, f"planted recovery: median ratio {median:.3f} over 20 instances, {elapsed:.0f}s")
    assert median >= 0.9
    assert elapsed < 600.0


def _enumerated_conductance_optimum(g, seed_node, interval):
    best = np.inf
    for size in range(1, g.n + 1):
        for combo in itertools.combinations(range(g.n), size):
            if seed_node not in combo:
                continue
            vol = volume(g, list(combo))
            if not (interval.lower <= vol <= interval.upper):
                continue
            best = min(best, conductance(g, list(combo)))
    return best


def test_a10_partition_exactness_and_feasibility():
    """Two-triangles solves hit the enumerated optimum; fuzzed solves stay feasible."""
    g = two_triangles()
    interval = VolumeConstraint(5.0, 9.0)
    failures = []
    for seed_node in range(6):
        best = _enumerated_conductance_optimum(g, seed_node, interval)
        result = solve_local_partition(
            g, seed_node, SolveConfig(steps=200, intervals=((5.0, 9.0),))
        )
        if abs(result.conductance - best) > 1e-12:
            failures.append((seed_node, result.conductance, best))
        if seed_node not in result.node_indices:
            failures.append((seed_node, "seed missing"))

    rng = np.random.default_rng(1010)
    big = gen_gnp(100, 0.1, rng)
    eligible = np.flatnonzero(big.degree > 0)
    for i in range(20):
        seed_node = int(rng.choice(eligible))
        center = float(big.degree[seed_node]) * float(rng.uniform(2.0, 5.0))
        lo, hi = 0.75 * center, 1.25 * center
        result = solve_local_partition(
            big, seed_node, SolveConfig(steps=80, intervals=((lo, hi),), seed=i)
        )
        if seed_node not in result.node_indices:
            failures.append((i, "seed missing on gnp"))
        if volume(big, result.node_indices) > hi + 1e-9:
            failures.append((i, "volume cap violated"))
    ok = not failures
    _announce("A10", ok, "partition: exact optimum 1/7 on both triangles, caps held on 20 fuzzed configs")
    assert not failures, failures[:5]


def test_a11_payloads_are_deterministic(tmp_path):
    """Identical config and seed give byte-identical payloads at any thread count."""

    def payload_bytes(argv, out_path):
        code = cli_main(argv + ["--out", str(out_path)])
        assert code == 0
        doc = json.loads(out_path.read_text())
        return json.dumps(doc["payload"], sort_keys=True).encode()

    rng = np.random.default_rng(1111)
    clique_graph = tmp_path / "clique.edges"
    clique_graph.write_text(to_edge_list_text(random_graph(rng, 30, density=0.4, weighted=True)))
    part_graph = tmp_path / "part.edges"
    part_graph.write_text(to_edge_list_text(two_triangles()))

    mismatches = []
    solve_argv = ["solve", "--graph", str(clique_graph), "--restarts", "6", "--steps", "60"]
    baseline = payload_bytes(solve_argv + ["--threads", "1"], tmp_path / "c1.json")
    for run, threads in enumerate(("1", "2", "4")):
        again = payload_bytes(solve_argv + ["--threads", threads], tmp_path / f"c{run}.json")
        if again != baseline:
            mismatches.append(("clique", threads))

    part_argv = [
        "solve", "--graph", str(part_graph), "--problem", "partition",
        "--seed-node", "0", "--steps", "80", "--num-intervals", "4",
    ]
    part_base = payload_bytes(part_argv + ["--threads", "1"], tmp_path / "p1.json")
    for run, threads in enumerate(("1", "3")):
        again = payload_bytes(part_argv + ["--threads", threads], tmp_path / f"p{run}.json")
        if again != part_base:
            mismatches.append(("partition", threads))

    gen_docs = []
    for name in ("gen-a", "gen-b"):
        out_dir = tmp_path / name
        code = cli_main(
            ["generate", "--count", "3", "--nodes", "12", "--seed", "5", "--out", str(out_dir)]
        )
        assert code == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        gen_docs.append(json.dumps(manifest["graphs"], sort_keys=True).encode())
    if gen_docs[0] != gen_docs[1]:
        mismatches.append(("generate", "repeat"))

    ok = not mismatches
    _announce("A11", ok, "determinism: solve/generate payloads byte-identical across reruns and threads")
    assert not mismatches, mismatches

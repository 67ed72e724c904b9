"""Command line entry point.

Subcommands: ``generate`` (random corpora with a manifest), ``solve`` (one
instance end to end), ``train`` (fit the message-passing producer on a
corpus), ``benchmark`` (solve a corpus split and emit CSV), and ``verify``
(recheck a saved result against its graph).

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
JSON output is sorted and split into ``config`` / ``payload`` / ``timing``
sections so payloads can be compared byte for byte across runs; CSV rows
keep the timing column last for the same reason.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from .certificates import Certificate, CliqueObjective, CutVolumeObjective, verify_solution
from .datasets import Corpus, gen_gnp, gen_planted_clique, load_corpus, save_corpus, split_corpus
from .distributions import VolumeConstraint
from .graphs import (
    Graph,
    as_mask,
    brute_force_max_clique,
    cut_weight,
    graph_digest,
    is_clique,
    load_dimacs_file,
    load_edge_list_file,
    set_weight,
    volume,
)
from .models import CliqueLossSpec, CutLossSpec, load_checkpoint, save_checkpoint, train_mpnn
from .solver import (
    SolveConfig,
    greedy_mis_complement,
    solve_local_partition,
    solve_max_clique,
)

__all__ = ["main", "build_parser"]

_REL_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_config_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; values are JSON scalars or bare strings."""
    overrides: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        overrides[key.strip().replace("-", "_")] = _parse_config_value(value)
    return overrides


def _apply_config(sub: argparse.ArgumentParser, overrides: dict) -> None:
    valid = {action.dest for action in sub._actions} - {"help", "config"}
    for key in overrides:
        if key not in valid:
            sub.error(f"unknown config key {key!r}")
    sub.set_defaults(**overrides)


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_graph(path: str, fmt: str) -> Graph:
    if fmt == "auto":
        fmt = "dimacs" if Path(path).suffix in {".col", ".clq", ".dimacs"} else "edges"
    if fmt == "dimacs":
        return load_dimacs_file(path)
    if fmt == "edges":
        return load_edge_list_file(path)
    raise ValueError(f"unknown graph format {fmt!r}")


def _load_corpus_arg(path: str) -> Corpus:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    return load_corpus(p)


def _parse_intervals(text: str) -> tuple[tuple[float, float], ...]:
    """``lo:hi,lo:hi`` -> interval tuples."""
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"bad interval {part!r}, expected lo:hi")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _parse_fractions(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _add_solver_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--producer", choices=["direct", "mpnn", "uniform"], default="direct")
    sub.add_argument(
        "--decode",
        default=None,
        help="hybrid|conditional|sweep for cliques (default hybrid), conditional|sampled for partitions (default conditional)",
    )
    sub.add_argument("--restarts", type=int, default=10)
    sub.add_argument("--steps", type=int, default=300)
    sub.add_argument("--lr", type=float, default=0.1)
    sub.add_argument("--opt-beta", type=float, default=SolveConfig.opt_beta, help="penalty weight used during optimization")
    sub.add_argument("--init-jitter", type=float, default=1.0, help="logit noise spread for restarts after the first")
    sub.add_argument("--gamma", type=float, default=None, help="certified offset (default: total edge weight)")
    sub.add_argument("--beta", type=float, default=None, help="certified penalty weight (default: total edge weight)")
    sub.add_argument("--t", type=float, default=0.9, help="Markov split point for certificates")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--time-budget", type=float, default=None, help="seconds; forces serial execution, may stop early")
    sub.add_argument("--k-samples", type=int, default=32, help="draws for the sampled partition decode")
    sub.add_argument("--checkpoint", default=None, help="trained producer weights (.json or .npz)")
    sub.add_argument("--intervals", default=None, help="explicit volume intervals, lo:hi,lo:hi")
    sub.add_argument("--num-intervals", type=int, default=8)
    sub.add_argument("--ball-hops", type=int, default=3)


def _solve_config(args) -> SolveConfig:
    mpnn = None
    if args.checkpoint:
        mpnn, _, _ = load_checkpoint(args.checkpoint)
    intervals = _parse_intervals(args.intervals) if args.intervals else None
    return SolveConfig(
        producer=args.producer,
        decode=args.decode,
        restarts=args.restarts,
        steps=args.steps,
        lr=args.lr,
        opt_beta=args.opt_beta,
        init_jitter=args.init_jitter,
        gamma=args.gamma,
        beta=args.beta,
        t=args.t,
        seed=args.seed,
        threads=args.threads,
        time_budget=args.time_budget,
        k_samples=args.k_samples,
        mpnn=mpnn,
        intervals=intervals,
        num_intervals=args.num_intervals,
        ball_hops=args.ball_hops,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    t0 = time.perf_counter()
    rng = np.random.default_rng(args.seed)
    graphs, names, meta = [], [], []
    for i in range(args.count):
        if args.kind == "gnp":
            graphs.append(gen_gnp(args.nodes, args.prob, rng))
            meta.append({})
        else:
            g, planted = gen_planted_clique(args.nodes, args.clique_size, args.prob, rng)
            graphs.append(g)
            meta.append({"planted": [int(x) for x in planted.indices()], "clique_size": args.clique_size})
        names.append(f"{args.kind}-{i:03d}")
    corpus = Corpus(graphs=graphs, names=names, splits=[""] * len(graphs), meta=meta)
    if args.splits == "none":
        corpus = Corpus(graphs=graphs, names=names, splits=["train"] * len(graphs), meta=meta)
    else:
        corpus = split_corpus(corpus, fractions=_parse_fractions(args.splits), rng=np.random.default_rng(args.seed + 1))
    manifest = save_corpus(corpus, args.out)
    payload = {
        "kind": args.kind,
        "count": len(graphs),
        "graphs": [
            {"name": n, "nodes": g.n, "edges": g.num_edges, "split": s, "digest": graph_digest(g)}
            for g, n, s in zip(corpus.graphs, corpus.names, corpus.splits)
        ],
    }
    doc = {
        "config": {
            "kind": args.kind,
            "count": args.count,
            "nodes": args.nodes,
            "prob": args.prob,
            "clique_size": args.clique_size,
            "seed": args.seed,
            "splits": args.splits,
            "out": str(manifest.parent),
        },
        "payload": payload,
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    _emit(doc, None)
    return 0


def cmd_solve(args) -> int:
    graph = _load_graph(args.graph, args.format)
    config = _solve_config(args)
    if args.problem == "clique":
        result = solve_max_clique(graph, config)
    else:
        if args.seed_node is None:
            raise ValueError("partition solving needs --seed-node")
        result = solve_local_partition(graph, args.seed_node, config)
    doc = {
        "config": {
            "problem": args.problem,
            "graph": args.graph,
            "seed_node": args.seed_node,
            **config.describe(),
        },
        "payload": {"graph_digest": graph_digest(graph), **result.payload()},
        "timing": {"wall_time_s": result.wall_time},
    }
    _emit(doc, args.out)
    return 0


def cmd_train(args) -> int:
    t0 = time.perf_counter()
    corpus = _load_corpus_arg(args.corpus)
    if args.objective == "clique":
        loss_spec = CliqueLossSpec(beta=args.opt_beta)
    else:
        loss_spec = CutLossSpec(None)
    init = None
    optimizer_state = None
    if args.init:
        init, optimizer_state, _ = load_checkpoint(args.init)
    result = train_mpnn(
        corpus,
        loss_spec,
        args.epochs,
        hidden=args.hidden,
        layers=args.layers,
        batch_size=args.batch_size,
        lr=args.lr,
        rng=np.random.default_rng(args.seed),
        init=init,
        optimizer_state=optimizer_state,
    )
    save_checkpoint(
        args.out,
        result.params,
        optimizer=result.optimizer,
        meta={"objective": args.objective, "epochs": result.epochs_trained, "seed": args.seed},
    )
    payload = {
        "checkpoint": str(args.out),
        "objective": args.objective,
        "epochs": result.epochs_trained,
        "hidden": result.params.hidden,
        "layers": result.params.layers,
        "history": {k: [float(x) for x in v] for k, v in result.history.items()},
    }
    doc = {
        "config": {
            "corpus": args.corpus,
            "objective": args.objective,
            "epochs": args.epochs,
            "hidden": args.hidden,
            "layers": args.layers,
            "batch_size": args.batch_size,
            "lr": args.lr,
            "opt_beta": args.opt_beta,
            "seed": args.seed,
            "init": args.init,
        },
        "payload": payload,
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    _emit(doc, None)
    return 0


def _benchmark_clique_row(args, name: str, graph: Graph, config: SolveConfig) -> list:
    t0 = time.perf_counter()
    result = solve_max_clique(graph, config)
    elapsed = time.perf_counter() - t0
    oracle = ""
    ratio = ""
    if not args.no_oracle and graph.n <= args.oracle_limit:
        best = brute_force_max_clique(graph)
        optimal = set_weight(graph, best.mask)
        oracle = repr(float(optimal))
        ratio = repr(float(result.objective / optimal)) if optimal > 0 else ""
    baseline = ""
    if args.compare == "greedy":
        baseline = repr(float(set_weight(graph, greedy_mis_complement(graph).mask)))
    elif args.compare == "uniform":
        from dataclasses import replace

        uni = solve_max_clique(graph, replace(config, producer="uniform"))
        baseline = repr(float(uni.objective))
    cert = result.certificate
    return [
        name,
        graph.n,
        graph.num_edges,
        repr(float(result.objective)),
        len(result.node_indices),
        oracle,
        ratio,
        baseline,
        repr(float(cert.bound)),
        cert.vacuous,
        repr(elapsed),
    ]


def _benchmark_partition_row(args, name: str, graph: Graph, config: SolveConfig) -> list:
    seed_node = int(np.argmax(graph.degree))
    t0 = time.perf_counter()
    result = solve_local_partition(graph, seed_node, config)
    elapsed = time.perf_counter() - t0
    cert = result.certificate
    return [
        name,
        graph.n,
        graph.num_edges,
        seed_node,
        repr(float(result.conductance)),
        repr(float(result.volume)),
        result.constraint_ok,
        repr(float(cert.bound)),
        cert.vacuous,
        repr(elapsed),
    ]


_CLIQUE_HEADER = [
    "name", "nodes", "edges", "weight", "size",
    "oracle", "ratio", "baseline", "cert_bound", "cert_vacuous", "time_s",
]
_PARTITION_HEADER = [
    "name", "nodes", "edges", "seed_node",
    "conductance", "volume", "lower_met", "cert_bound", "cert_vacuous", "time_s",
]


def cmd_benchmark(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    if args.split:
        indices = corpus.subset(args.split)
        if not indices:
            raise ValueError(f"corpus has no graphs in split {args.split!r}")
    else:
        indices = list(range(len(corpus)))
    config = _solve_config(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if args.problem == "clique":
        writer.writerow(_CLIQUE_HEADER)
        for i in indices:
            writer.writerow(_benchmark_clique_row(args, corpus.names[i], corpus.graphs[i], config))
    else:
        writer.writerow(_PARTITION_HEADER)
        for i in indices:
            writer.writerow(_benchmark_partition_row(args, corpus.names[i], corpus.graphs[i], config))
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    doc = json.loads(Path(args.result).read_text(encoding="utf-8"))
    payload = doc.get("payload", doc)
    graph = _load_graph(args.graph, args.format)

    digest = graph_digest(graph)
    recorded = payload.get("graph_digest")
    digest_ok = recorded is None or recorded == digest
    if not digest_ok:
        _emit(
            {
                "config": {"result": args.result, "graph": args.graph, "strict": args.strict},
                "payload": {"verified": False, "digest_ok": False, "recorded": recorded, "actual": digest},
                "timing": {"wall_time_s": time.perf_counter() - t0},
            },
            None,
        )
        return 1

    members = as_mask(graph.n, np.asarray(payload["node_indices"], dtype=np.int64))
    if payload["problem"] == "clique":
        objective_value = set_weight(graph, members)
        constraint_now = is_clique(graph, members)
        problem = CliqueObjective(gamma=float(payload["gamma"]))
    elif payload["problem"] == "partition":
        objective_value = cut_weight(graph, members)
        interval = VolumeConstraint(*payload["interval"])
        constraint_now = interval.contains(volume(graph, members))
        problem = CutVolumeObjective(interval)
    else:
        raise ValueError(f"unknown problem {payload['problem']!r}")

    objective_ok = abs(objective_value - float(payload["objective"])) <= _REL_TOL * max(
        1.0, abs(objective_value)
    )
    constraint_ok = constraint_now == bool(payload["constraint_ok"])
    certificate = Certificate.from_json(payload["certificate"])
    if certificate.vacuous:
        certificate_ok = not args.strict
    else:
        certificate_ok = verify_solution(graph, members, certificate, problem, strict=args.strict)
    verified = digest_ok and objective_ok and constraint_ok and certificate_ok
    _emit(
        {
            "config": {"result": args.result, "graph": args.graph, "strict": args.strict},
            "payload": {
                "verified": verified,
                "digest_ok": digest_ok,
                "objective_ok": objective_ok,
                "objective_recomputed": float(objective_value),
                "constraint_ok": constraint_ok,
                "certificate_ok": certificate_ok,
                "certificate_vacuous": certificate.vacuous,
            },
            "timing": {"wall_time_s": time.perf_counter() - t0},
        },
        None,
    )
    return 0 if verified else 2


# ---------------------------------------------------------------------------
# parser


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="cliquecut", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest="command")
    subs: dict[str, argparse.ArgumentParser] = {}

    gen = subparsers.add_parser("generate", help="write a random graph corpus with a manifest")
    gen.add_argument("--kind", choices=["gnp", "planted"], default="gnp")
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--nodes", type=int, default=50)
    gen.add_argument("--prob", type=float, default=0.5, help="edge probability")
    gen.add_argument("--clique-size", type=int, default=10, help="planted clique size")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--splits", default="0.6,0.2,0.2", help="train,val,test fractions or 'none'")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--config", default=None, help="key=value defaults file")
    gen.set_defaults(func=cmd_generate)
    subs["generate"] = gen

    sol = subparsers.add_parser("solve", help="solve one instance and print a certified result")
    sol.add_argument("--graph", required=True)
    sol.add_argument("--format", choices=["auto", "edges", "dimacs"], default="auto")
    sol.add_argument("--problem", choices=["clique", "partition"], default="clique")
    sol.add_argument("--seed-node", type=int, default=None, help="partition seed node")
    sol.add_argument("--out", default=None, help="write the result JSON here instead of stdout")
    sol.add_argument("--config", default=None, help="key=value defaults file")
    _add_solver_args(sol)
    sol.set_defaults(func=cmd_solve)
    subs["solve"] = sol

    tr = subparsers.add_parser("train", help="train the message-passing producer on a corpus")
    tr.add_argument("--corpus", required=True, help="corpus directory or manifest path")
    tr.add_argument("--objective", choices=["clique", "cut"], default="clique")
    tr.add_argument("--epochs", type=int, default=20)
    tr.add_argument("--hidden", type=int, default=16)
    tr.add_argument("--layers", type=int, default=3)
    tr.add_argument("--batch-size", type=int, default=8)
    tr.add_argument("--lr", type=float, default=0.001)
    tr.add_argument("--opt-beta", type=float, default=1.0)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--init", default=None, help="resume from this checkpoint")
    tr.add_argument("--out", required=True, help="checkpoint path (.json or .npz)")
    tr.add_argument("--config", default=None, help="key=value defaults file")
    tr.set_defaults(func=cmd_train)
    subs["train"] = tr

    bench = subparsers.add_parser("benchmark", help="solve a corpus split, emit CSV (time column last)")
    bench.add_argument("--corpus", required=True)
    bench.add_argument("--split", default="test", help="corpus split to run ('' for all)")
    bench.add_argument("--problem", choices=["clique", "partition"], default="clique")
    bench.add_argument("--compare", choices=["none", "greedy", "uniform"], default="none")
    bench.add_argument("--no-oracle", action="store_true", help="skip the exact reference")
    bench.add_argument("--oracle-limit", type=int, default=20, help="max nodes for the exact reference")
    bench.add_argument("--out", default=None, help="write CSV here instead of stdout")
    bench.add_argument("--config", default=None, help="key=value defaults file")
    _add_solver_args(bench)
    bench.set_defaults(func=cmd_benchmark)
    subs["benchmark"] = bench

    ver = subparsers.add_parser("verify", help="recheck a saved result against its graph")
    ver.add_argument("--result", required=True, help="result JSON from solve")
    ver.add_argument("--graph", required=True)
    ver.add_argument("--format", choices=["auto", "edges", "dimacs"], default="auto")
    ver.add_argument("--strict", action="store_true", help="vacuous certificates fail; box claims need bound and constraint")
    ver.add_argument("--config", default=None, help="key=value defaults file")
    ver.set_defaults(func=cmd_verify)
    subs["verify"] = ver

    return parser, subs


def main(argv: list[str] | None = None) -> int:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    if getattr(args, "config", None):
        try:
            overrides = _read_config_file(args.config)
        except OSError as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return 1
        _apply_config(subs[args.command], overrides)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Instance generation and corpus management.

Generators are deterministic given a numpy Generator.  A corpus is a list of
graphs with names, train/val/test splits, and optional per-graph metadata
(e.g. the planted clique), serialized as edge-list files plus a JSON
manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graphs import Graph, NodeSet, graph_digest, load_edge_list_file, to_edge_list_text

__all__ = [
    "Corpus",
    "gen_gnp",
    "gen_planted_clique",
    "split_corpus",
    "save_corpus",
    "load_corpus",
]

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")


@dataclass
class Corpus:
    """Graphs plus names, split labels, and JSON-safe per-graph metadata."""

    graphs: list[Graph]
    names: list[str]
    splits: list[str] = field(default_factory=list)
    meta: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.splits:
            self.splits = [""] * len(self.graphs)
        if not self.meta:
            self.meta = [{} for _ in self.graphs]
        if not (len(self.graphs) == len(self.names) == len(self.splits) == len(self.meta)):
            raise ValueError("corpus fields must have equal length")

    def __len__(self) -> int:
        return len(self.graphs)

    def subset(self, split: str) -> list[int]:
        return [i for i, s in enumerate(self.splits) if s == split]


def gen_gnp(n: int, p_edge: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi G(n, p) with unit weights."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not (0.0 <= p_edge <= 1.0):
        raise ValueError("edge probability must lie in [0, 1]")
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p_edge
    u, v = iu[keep], iv[keep]
    return Graph(n, u, v, np.ones(u.size))


def gen_planted_clique(
    n: int, k: int, p_background: float, rng: np.random.Generator
) -> tuple[Graph, NodeSet]:
    """G(n, p) with a clique forced on k random nodes; returns (graph, planted set)."""
    if not (0 <= k <= n):
        raise ValueError("need 0 <= k <= n")
    base = gen_gnp(n, p_background, rng)
    planted = np.sort(rng.choice(n, size=k, replace=False))
    pair_ids = base.edge_u * n + base.edge_v
    pu, pv = np.triu_indices(k, k=1)
    clique_ids = planted[pu] * n + planted[pv]
    all_ids = np.union1d(pair_ids, clique_ids)
    u, v = all_ids // n, all_ids % n
    graph = Graph(n, u, v, np.ones(u.size))
    return graph, NodeSet.from_indices(graph, planted)


def split_corpus(corpus: Corpus, fractions=(0.6, 0.2, 0.2), rng: np.random.Generator | None = None) -> Corpus:
    """Assign train/val/test labels by shuffled largest-remainder allocation.

    Counts match the fractions to within rounding and the assignment is
    deterministic for a given generator.
    """
    frac = np.asarray(fractions, dtype=np.float64)
    if frac.size != 3 or np.any(frac < 0.0) or abs(frac.sum() - 1.0) > 1e-9:
        raise ValueError("fractions must be three non-negative numbers summing to 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    total = len(corpus)
    exact = frac * total
    counts = np.floor(exact).astype(int)
    remainder_order = np.argsort(-(exact - counts), kind="stable")
    for i in range(total - counts.sum()):
        counts[remainder_order[i % 3]] += 1
    perm = rng.permutation(total)
    splits = [""] * total
    pos = 0
    for label, count in zip(SPLITS, counts):
        for idx in perm[pos : pos + count]:
            splits[idx] = label
        pos += count
    return Corpus(graphs=corpus.graphs, names=corpus.names, splits=splits, meta=corpus.meta)


def save_corpus(corpus: Corpus, out_dir) -> Path:
    """Write one edge-list file per graph plus manifest.json; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for graph, name, split, meta in zip(corpus.graphs, corpus.names, corpus.splits, corpus.meta):
        rel = f"{name}.edges"
        (out / rel).write_text(to_edge_list_text(graph), encoding="utf-8")
        entries.append(
            {
                "name": name,
                "path": rel,
                "split": split,
                "nodes": graph.n,
                "edges": graph.num_edges,
                "digest": graph_digest(graph),
                "meta": meta,
            }
        )
    manifest = {"format_version": MANIFEST_VERSION, "graphs": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def load_corpus(manifest_path) -> Corpus:
    """Read a manifest and its graphs; verifies digests."""
    path = Path(manifest_path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format_version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {doc.get('format_version')}")
    graphs: list[Graph] = []
    names: list[str] = []
    splits: list[str] = []
    meta: list[dict] = []
    for entry in doc["graphs"]:
        graph = load_edge_list_file(path.parent / entry["path"])
        if "digest" in entry and graph_digest(graph) != entry["digest"]:
            raise ValueError(f"digest mismatch for {entry['name']}: file changed since manifest")
        graphs.append(graph)
        names.append(entry["name"])
        splits.append(entry.get("split", ""))
        meta.append(entry.get("meta", {}))
    return Corpus(graphs=graphs, names=names, splits=splits, meta=meta)

"""Author/material/property hypergraph built from a corpus slice.

One hyperedge per paper containing its author nodes, material nodes, and the
single property node when the paper mentions the property keyword family.
Every keyword variant collapses onto that one property node.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, record_mentions_any
from .errors import FormatError, ValidationError

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = "hypergraph-snapshot"
SNAPSHOT_VERSION = 1

PROPERTY_LABEL = "<PROPERTY>"


class NodeKind(IntEnum):
    AUTHOR = 0
    MATERIAL = 1
    PROPERTY = 2


@dataclass
class Hypergraph:
    """Immutable incidence structure; do not mutate after construction.

    kinds[v] and labels[v] describe node v; edges[e] is a sorted array of the
    node ids inside hyperedge e; incident[v] lists the edge ids containing v.
    """

    kinds: np.ndarray
    labels: tuple[str, ...]
    edges: tuple[np.ndarray, ...]
    edge_meta: tuple[tuple[str, int], ...]
    incident: tuple[np.ndarray, ...]
    skipped_records: int = 0
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {
                (int(self.kinds[v]), self.labels[v]): v
                for v in range(len(self.labels))
            }

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def node_degrees(self) -> np.ndarray:
        return np.array([len(inc) for inc in self.incident], dtype=np.int64)

    @property
    def edge_sizes(self) -> np.ndarray:
        return np.array([len(e) for e in self.edges], dtype=np.int64)

    @property
    def is_author(self) -> np.ndarray:
        return self.kinds == int(NodeKind.AUTHOR)

    def node_id(self, kind: NodeKind, label: str) -> int:
        key = (int(kind), label)
        if key not in self._index:
            raise LookupError(f"no {kind.name} node labeled {label!r}")
        return self._index[key]

    def property_node(self) -> int | None:
        key = (int(NodeKind.PROPERTY), PROPERTY_LABEL)
        return self._index.get(key)

    def nodes_of_kind(self, kind: NodeKind) -> list[int]:
        return [v for v in range(self.n_nodes) if self.kinds[v] == int(kind)]


def from_edge_sets(
    kinds: Sequence[int],
    labels: Sequence[str],
    edges: Sequence[Iterable[int]],
    edge_meta: Sequence[tuple[str, int]] | None = None,
) -> Hypergraph:
    """Low-level constructor from explicit node and edge lists (tests, fixtures)."""
    n = len(labels)
    if len(kinds) != n:
        raise ValidationError("kinds and labels must have equal length")
    edge_arrays = []
    for e_idx, members in enumerate(edges):
        arr = np.array(sorted(set(int(v) for v in members)), dtype=np.int64)
        if arr.size == 0:
            raise ValidationError(f"edge {e_idx} is empty")
        if arr[0] < 0 or arr[-1] >= n:
            raise ValidationError(f"edge {e_idx} references unknown node ids")
        edge_arrays.append(arr)
    if edge_meta is None:
        edge_meta = tuple((f"e{i}", 0) for i in range(len(edge_arrays)))
    incident: list[list[int]] = [[] for _ in range(n)]
    for e_idx, arr in enumerate(edge_arrays):
        for v in arr:
            incident[int(v)].append(e_idx)
    return Hypergraph(
        kinds=np.array([int(k) for k in kinds], dtype=np.int8),
        labels=tuple(labels),
        edges=tuple(edge_arrays),
        edge_meta=tuple(edge_meta),
        incident=tuple(np.array(inc, dtype=np.int64) for inc in incident),
    )


def build_hypergraph(c: Corpus, canonical_ids: bool = False) -> Hypergraph:
    """One hyperedge per record over authors + materials (+ property node).

    Entities that themselves match a property keyword collapse onto the single
    property node.  Records contributing fewer than two distinct nodes are
    skipped and counted.  With canonical_ids=True, node ids follow (kind,
    label) sort order and edges follow record-id order, so permuting the input
    yields an identical graph.
    """
    if len(c) == 0:
        raise ValidationError("cannot build a hypergraph from an empty corpus")
    kw = c.property_keywords

    record_keys: list[tuple[str, int, list[tuple[int, str]]]] = []
    skipped = 0
    for rec in c.records:
        keys: list[tuple[int, str]] = []
        seen: set[tuple[int, str]] = set()
        mentions = record_mentions_any(rec, kw)
        for a in rec.authors:
            key = (int(NodeKind.AUTHOR), a)
            if key not in seen:
                seen.add(key)
                keys.append(key)
        for ent in rec.entities:
            if ent.lower() in kw:
                key = (int(NodeKind.PROPERTY), PROPERTY_LABEL)
            else:
                key = (int(NodeKind.MATERIAL), ent)
            if key not in seen:
                seen.add(key)
                keys.append(key)
        if mentions:
            key = (int(NodeKind.PROPERTY), PROPERTY_LABEL)
            if key not in seen:
                seen.add(key)
                keys.append(key)
        if len(keys) < 2:
            skipped += 1
            continue
        record_keys.append((rec.id, rec.year, keys))

    if skipped:
        logger.warning("skipped %d records with fewer than two nodes", skipped)
    if not record_keys:
        raise ValidationError("no record produced a hyperedge of size >= 2")

    if canonical_ids:
        record_keys.sort(key=lambda item: item[0])
        all_keys = sorted({k for _, _, keys in record_keys for k in keys})
        index = {k: i for i, k in enumerate(all_keys)}
    else:
        index = {}
        for _, _, keys in record_keys:
            for k in keys:
                if k not in index:
                    index[k] = len(index)

    n = len(index)
    kinds = np.zeros(n, dtype=np.int8)
    labels: list[str] = [""] * n
    for (kind, label), v in index.items():
        kinds[v] = kind
        labels[v] = label

    edge_arrays = []
    edge_meta = []
    incident: list[list[int]] = [[] for _ in range(n)]
    for e_idx, (rec_id, year, keys) in enumerate(record_keys):
        arr = np.array(sorted(index[k] for k in keys), dtype=np.int64)
        edge_arrays.append(arr)
        edge_meta.append((rec_id, year))
        for v in arr:
            incident[int(v)].append(e_idx)

    return Hypergraph(
        kinds=kinds,
        labels=tuple(labels),
        edges=tuple(edge_arrays),
        edge_meta=tuple(edge_meta),
        incident=tuple(np.array(inc, dtype=np.int64) for inc in incident),
        skipped_records=skipped,
    )


def neighbors(h: Hypergraph, v: int, kind_filter: NodeKind | None = None) -> set[int]:
    """All nodes sharing at least one hyperedge with v, optionally kind-filtered."""
    if not 0 <= v < h.n_nodes:
        raise LookupError(f"unknown node id {v}")
    out: set[int] = set()
    for e in h.incident[v]:
        out.update(int(u) for u in h.edges[e])
    out.discard(v)
    if kind_filter is not None:
        out = {u for u in out if h.kinds[u] == int(kind_filter)}
    return out


def projected_adjacency(
    h: Hypergraph,
    keep: Iterable[NodeKind],
    coauthor_augment: bool = False,
) -> dict[int, set[int]]:
    """Clique-expand hyperedges onto the kept node kinds.

    Kept nodes u, v are adjacent iff they co-occur in a hyperedge; with
    coauthor_augment also iff they share at least one author neighbor.
    Symmetric, no self-loops; isolated kept nodes appear with empty sets.
    """
    keep_set = {int(k) for k in keep}
    if not keep_set:
        raise ValidationError("keep must name at least one node kind")
    kept = [v for v in range(h.n_nodes) if int(h.kinds[v]) in keep_set]
    adj: dict[int, set[int]] = {v: set() for v in kept}

    def connect(members: list[int]):
        for i, u in enumerate(members):
            for w in members[i + 1 :]:
                if u != w:
                    adj[u].add(w)
                    adj[w].add(u)

    for arr in h.edges:
        members = [int(v) for v in arr if int(h.kinds[v]) in keep_set]
        connect(members)

    if coauthor_augment:
        for a in range(h.n_nodes):
            if h.kinds[a] != int(NodeKind.AUTHOR):
                continue
            reach = sorted(
                u for u in neighbors(h, a) if int(h.kinds[u]) in keep_set
            )
            connect(reach)
    return adj


def save_snapshot(h: Hypergraph, path) -> None:
    """Versioned JSON snapshot for reuse across CLI invocations."""
    payload = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "nodes": [[int(h.kinds[v]), h.labels[v]] for v in range(h.n_nodes)],
        "edges": [
            [[int(v) for v in arr], meta[0], meta[1]]
            for arr, meta in zip(h.edges, h.edge_meta)
        ],
        "skipped_records": h.skipped_records,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_snapshot(path) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or payload.get("magic") != SNAPSHOT_MAGIC:
        raise FormatError(f"{path}: not a hypergraph snapshot")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise FormatError(f"{path}: unsupported snapshot version {payload.get('version')!r}")
    kinds = [int(k) for k, _ in payload["nodes"]]
    labels = [label for _, label in payload["nodes"]]
    edges = [members for members, _, _ in payload["edges"]]
    meta = [(pid, int(year)) for _, pid, year in payload["edges"]]
    g = from_edge_sets(kinds, labels, edges, meta)
    g.skipped_records = int(payload.get("skipped_records", 0))
    return g

import json

import numpy as np
import pytest

from hyperdiscovery import corpus as corpus_mod
from hyperdiscovery import hypergraph as hg

PROPERTY_KW = ["thermoelectric", "seebeck"]


def make_corpus(records, keywords=PROPERTY_KW):
    lines = [json.dumps(r) for r in records]
    return corpus_mod.parse_corpus(lines, keywords)


@pytest.fixture
def g1_corpus():
    """Three papers: p1{a1,a2,m1,+prop}, p2{a1,m1,m2}, p3{a3,m2,+prop}."""
    return make_corpus(
        [
            {"id": "p1", "year": 2000, "authors": ["a1", "a2"], "entities": ["m1"],
             "tokens": ["thermoelectric"]},
            {"id": "p2", "year": 2001, "authors": ["a1"], "entities": ["m1", "m2"]},
            {"id": "p3", "year": 2001, "authors": ["a3"], "entities": ["m2"],
             "tokens": ["thermoelectric"]},
        ]
    )


@pytest.fixture
def g1(g1_corpus):
    return hg.build_hypergraph(g1_corpus)


def node(h, kind, label):
    return h.node_id(kind, label)


@pytest.fixture
def sd_corpus():
    """Author-overlap fixture: |A(red)|=5, |A(blue)|=3, overlap {tri, diamond};
    in 2008 the overlap shrinks to {diamond} with both year-sets of size 3."""
    return make_corpus(
        [
            {"id": "s1", "year": 2007, "authors": ["tri", "nabla"], "entities": ["red"]},
            {"id": "s2", "year": 2007, "authors": ["circ"], "entities": ["red"]},
            {"id": "s3", "year": 2008, "authors": ["star", "diamond", "circ"],
             "entities": ["red"]},
            {"id": "s4", "year": 2008, "authors": ["tri", "square"], "entities": [],
             "tokens": ["blue"]},
            {"id": "s5", "year": 2008, "authors": ["diamond"], "entities": [],
             "tokens": ["blue"]},
        ],
        keywords=["blue"],
    )


@pytest.fixture
def eval_corpus():
    """Six papers around prediction year 2002; hand-traced hit rates live in
    test_evaluation/test_acceptance."""
    return make_corpus(
        [
            {"id": "p1", "year": 2000, "authors": ["a1", "a2"], "entities": ["m1"],
             "tokens": ["thermoelectric"]},
            {"id": "p2", "year": 2000, "authors": ["a1"], "entities": ["m2", "m3"]},
            {"id": "p3", "year": 2001, "authors": ["a3"], "entities": ["m2", "m4"]},
            {"id": "p4", "year": 2002, "authors": ["a2"], "entities": ["m2"],
             "tokens": ["thermoelectric"]},
            {"id": "p5", "year": 2003, "authors": ["a3"], "entities": ["m3", "m5"],
             "tokens": ["thermoelectric"]},
            {"id": "p6", "year": 2004, "authors": ["a1"], "entities": ["m4"],
             "tokens": ["thermoelectric"]},
        ]
    )


# --- independent brute-force oracles for transition probabilities ----------


def bf_transition(edges, i, j):
    """Eq-level evaluation: (1/d(i)) * sum over shared edges of 1/|e|."""
    d_i = sum(1 for e in edges if i in e)
    if d_i == 0:
        return 0.0
    return sum(1.0 / len(e) for e in edges if i in e and j in e) / d_i


def bf_author_mediated(kinds, edges, src, dst, steps):
    """Exhaustive path sum over author intermediates."""
    authors = [v for v in range(len(kinds)) if kinds[v] == int(hg.NodeKind.AUTHOR)]
    if steps == 2:
        return sum(
            bf_transition(edges, src, a) * bf_transition(edges, a, dst)
            for a in authors
        )
    if steps == 3:
        return sum(
            bf_transition(edges, src, a)
            * bf_transition(edges, a, b)
            * bf_transition(edges, b, dst)
            for a in authors
            for b in authors
        )
    raise ValueError("oracle covers steps 2 and 3")


def write_pipeline_corpus(dirpath, n_records=60, seed=13):
    """Synthetic dated corpus on disk, rich enough to drive every CLI stage."""
    rng = np.random.default_rng(seed)
    authors = [f"A{i:02d}" for i in range(12)]
    materials = [f"M{i:02d}" for i in range(14)]
    lines = []
    for i in range(n_records):
        year = 1996 + int(rng.integers(10))
        recs_a = sorted(rng.choice(authors, size=int(rng.integers(1, 4)), replace=False))
        recs_m = sorted(rng.choice(materials, size=int(rng.integers(1, 4)), replace=False))
        tokens = list(recs_m)
        if rng.random() < 0.3:
            tokens.append("thermoelectric")
        lines.append(json.dumps({
            "id": f"p{i:03d}", "year": year, "authors": list(recs_a),
            "entities": list(recs_m), "tokens": tokens,
        }))
    corpus_path = dirpath / "corpus.jsonl"
    corpus_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    kw_path = dirpath / "keywords.txt"
    kw_path.write_text("thermoelectric\nseebeck\n", encoding="utf-8")
    return corpus_path, kw_path


def random_hypergraph(rng, max_nodes=12, max_edges=8):
    """Random small instance with at least one author and two concepts."""
    n = int(rng.integers(4, max_nodes + 1))
    kinds = [int(hg.NodeKind.AUTHOR) if rng.random() < 0.4 else int(hg.NodeKind.MATERIAL)
             for _ in range(n)]
    kinds[0] = int(hg.NodeKind.AUTHOR)
    kinds[1] = int(hg.NodeKind.MATERIAL)
    kinds[2] = int(hg.NodeKind.PROPERTY)
    labels = [f"n{i}" for i in range(n)]
    m = int(rng.integers(1, max_edges + 1))
    edges = []
    for _ in range(m):
        size = int(rng.integers(2, min(6, n) + 1))
        members = rng.choice(n, size=size, replace=False)
        edges.append(sorted(int(v) for v in members))
    return hg.from_edge_sets(kinds, labels, edges), kinds, [set(e) for e in edges]

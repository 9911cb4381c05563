"""Row-stochastic node transitions and exact multistep author-mediated walks.

A single step picks a hyperedge uniformly among the d(i) edges incident to the
current node, then a node uniformly inside it, so

    P(i, j) = (1/d(i)) * sum over edges e containing both i and j of 1/d(e).

The literal uniform choice includes the current node, which puts mass on the
diagonal and keeps every positive-degree row summing to exactly 1.  The
exclude_self variant renormalizes the in-edge choice over the other d(e)-1
members (edges of size 1 are then unusable and drop out of the edge choice).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DomainError
from .hypergraph import Hypergraph, NodeKind


@dataclass
class TransitionMatrix:
    """CSR matrix of one-step probabilities plus node bookkeeping."""

    matrix: sparse.csr_array
    kinds: np.ndarray
    labels: tuple[str, ...]
    zero_rows: np.ndarray
    exclude_self: bool = False

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    def author_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == int(NodeKind.AUTHOR))


def _incidence(h: Hypergraph) -> sparse.csr_array:
    """R: edges x nodes, R[e, v] = 1 iff v in edge e."""
    rows, cols = [], []
    for e_idx, arr in enumerate(h.edges):
        rows.extend([e_idx] * len(arr))
        cols.extend(int(v) for v in arr)
    data = np.ones(len(rows), dtype=np.float64)
    return sparse.csr_array(
        (data, (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(h.n_edges, h.n_nodes),
    )


def transition_matrix(h: Hypergraph, exclude_self: bool = False) -> TransitionMatrix:
    """Build the |V| x |V| one-step matrix; zero-degree rows stay zero, flagged."""
    if h.n_nodes == 0:
        raise DomainError("hypergraph has no nodes")
    R = _incidence(h)
    d_e = h.edge_sizes.astype(np.float64)
    d_v = h.node_degrees.astype(np.float64)

    if not exclude_self:
        inv_e = sparse.dia_array((1.0 / d_e[None, :], [0]), shape=(h.n_edges, h.n_edges))
        co = (R.T @ inv_e @ R).tocsr()  # co[i, j] = sum_e 1/d(e) over shared edges
        inv_v = np.divide(1.0, d_v, out=np.zeros_like(d_v), where=d_v > 0)
        P = sparse.dia_array((inv_v[None, :], [0]), shape=(h.n_nodes, h.n_nodes)) @ co
        zero = d_v == 0
    else:
        usable = d_e >= 2
        inv_em1 = np.where(usable, 1.0 / np.maximum(d_e - 1.0, 1.0), 0.0)
        inv_e = sparse.dia_array((inv_em1[None, :], [0]), shape=(h.n_edges, h.n_edges))
        co = (R.T @ inv_e @ R).tolil()
        co.setdiag(0.0)
        co = co.tocsr()
        d_v2 = np.zeros(h.n_nodes)
        for e_idx, arr in enumerate(h.edges):
            if usable[e_idx]:
                d_v2[arr] += 1.0
        inv_v = np.divide(1.0, d_v2, out=np.zeros_like(d_v2), where=d_v2 > 0)
        P = sparse.dia_array((inv_v[None, :], [0]), shape=(h.n_nodes, h.n_nodes)) @ co
        zero = d_v2 == 0

    P = sparse.csr_array(P)
    P.eliminate_zeros()
    return TransitionMatrix(
        matrix=P,
        kinds=h.kinds.copy(),
        labels=h.labels,
        zero_rows=zero,
        exclude_self=exclude_self,
    )


def _check_concept(tm: TransitionMatrix, v: int, role: str) -> None:
    if not 0 <= v < tm.n_nodes:
        raise LookupError(f"unknown node id {v}")
    if tm.kinds[v] == int(NodeKind.AUTHOR):
        raise DomainError(f"{role} node {v} is an author; endpoints must be non-author")


def author_mediated_row(tm: TransitionMatrix, source: int, steps: int = 2) -> np.ndarray:
    """Probabilities of reaching each node from `source` in exactly `steps`
    steps with every intermediate node an author.

    Evaluated as a sparse vector-matrix chain over the author block; the full
    multistep matrix is never materialized.  Author positions in the returned
    row are zeroed (endpoints are concept nodes by definition).
    """
    _check_concept(tm, source, "source")
    if steps < 2:
        raise DomainError("author-mediated transitions need steps >= 2")
    authors = tm.author_indices()
    out = np.zeros(tm.n_nodes)
    if authors.size == 0:
        return out
    P = tm.matrix
    v = P[[source], :].toarray().ravel()[authors]  # P(source, [A])
    if steps > 2:
        P_aa = P[authors, :][:, authors]  # author-to-author block
        for _ in range(steps - 2):
            v = v @ P_aa
    out = v @ P[authors, :]
    out = np.asarray(out).ravel()
    out[authors] = 0.0
    return out


def author_mediated_transition(
    tm: TransitionMatrix, source: int, target: int, steps: int = 2
) -> float:
    """Exact probability of source -> (authors)^(steps-1) -> target."""
    _check_concept(tm, target, "target")
    row = author_mediated_row(tm, source, steps)
    return float(row[target])


def symmetric_length2_score(tm: TransitionMatrix, w1: int, w2: int) -> float:
    """Average of the two directed length-2 author-mediated probabilities."""
    fwd = author_mediated_transition(tm, w1, w2, steps=2)
    bwd = author_mediated_transition(tm, w2, w1, steps=2)
    return 0.5 * (fwd + bwd)


def export_coo(tm: TransitionMatrix, path, header_comment: str | None = None) -> None:
    """Coordinate text export: header `nrows ncols nnz`, then `row col value`."""
    coo = tm.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i in order:
            fh.write(f"{coo.row[i]} {coo.col[i]} {float(coo.data[i])!r}\n")

"""Alpha-biased truncated random walks, window pairs, and negative sampling.

One walk step: pick an incident hyperedge uniformly, then pick a node inside
it where every author weighs 1 and every concept (material/property) weighs
alpha, normalized by |authors| + alpha * |concepts|.  alpha=1 recovers the
uniform in-edge choice; alpha=inf never emits an author.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .hypergraph import Hypergraph, NodeKind

_MAX_EDGE_RETRIES = 16


@dataclass(frozen=True)
class WalkConfig:
    alpha: float = 1.0
    walk_length: int = 20
    walks_per_start: int = 10
    window: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.walk_length < 2:
            raise ValidationError("walk_length must be >= 2")
        if self.window < 1:
            raise ValidationError("window must be >= 1")
        if not (self.alpha >= 0):
            raise ValidationError("alpha must be >= 0 (math.inf allowed)")
        if self.walks_per_start < 1:
            raise ValidationError("walks_per_start must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be a nonnegative integer")


@dataclass
class WalkCorpus:
    sequences: list[list[int]]
    start_policy: dict
    author_ids: frozenset[int]


def sample_step(
    h: Hypergraph, current: int, alpha: float, rng: np.random.Generator
) -> int | None:
    """One biased step from `current`; None signals walk truncation."""
    inc = h.incident[current]
    if len(inc) == 0:
        return None
    is_author = h.is_author
    for _ in range(_MAX_EDGE_RETRIES):
        e = int(inc[rng.integers(len(inc))])
        members = h.edges[e]
        author_mask = is_author[members]
        if math.isinf(alpha):
            concepts = members[~author_mask]
            if concepts.size:
                return int(concepts[rng.integers(concepts.size)])
            continue  # author-only edge cannot emit under alpha=inf
        weights = np.where(author_mask, 1.0, alpha)
        total = weights.sum()
        if total <= 0:
            continue  # alpha=0 inside an all-concept edge
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(weights), r, side="right"))
        return int(members[min(idx, len(members) - 1)])
    return None


def _walk_from(h: Hypergraph, start: int, cfg: WalkConfig, walk_idx: int) -> list[int]:
    rng = np.random.default_rng((cfg.seed, start, walk_idx))
    seq = [start]
    while len(seq) < cfg.walk_length:
        nxt = sample_step(h, seq[-1], cfg.alpha, rng)
        if nxt is None:
            break
        seq.append(nxt)
    return seq


def _walks_for_chunk(args) -> list[list[int]]:
    h, cfg, starts = args
    out = []
    for s in starts:
        for j in range(cfg.walks_per_start):
            out.append(_walk_from(h, s, cfg, j))
    return out


def generate_walks(h: Hypergraph, cfg: WalkConfig, workers: int = 1) -> WalkCorpus:
    """walks_per_start sequences from every material/property node.

    Each walk owns an RNG stream keyed by (seed, start, index), so output is
    byte-identical for a given seed regardless of worker count.
    """
    starts = sorted(
        v
        for v in range(h.n_nodes)
        if h.kinds[v] in (int(NodeKind.MATERIAL), int(NodeKind.PROPERTY))
    )
    sequences: list[list[int]] = []
    if workers > 1 and len(starts) > workers:
        chunks = [list(c) for c in np.array_split(starts, workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_walks_for_chunk, [(h, cfg, c) for c in chunks]):
                sequences.extend(part)
    else:
        sequences = _walks_for_chunk((h, cfg, starts))
    policy = {
        "alpha": cfg.alpha,
        "walk_length": cfg.walk_length,
        "walks_per_start": cfg.walks_per_start,
        "seed": cfg.seed,
        "start_kinds": ["MATERIAL", "PROPERTY"],
    }
    author_ids = frozenset(int(v) for v in np.flatnonzero(h.is_author))
    return WalkCorpus(sequences=sequences, start_policy=policy, author_ids=author_ids)


def sliding_pairs(sequences: Iterable[Sequence], window: int) -> list[tuple]:
    """All ordered (center, context) pairs within positional distance <= window."""
    if window < 1:
        raise ValidationError("window must be >= 1")
    pairs = []
    for seq in sequences:
        n = len(seq)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((seq[i], seq[j]))
    return pairs


def window_pairs(
    wc: WalkCorpus, window: int, drop_authors: bool = False
) -> list[tuple[int, int]]:
    """Windowed pairs over the walk corpus; drop_authors removes author nodes
    from each sequence before windowing."""
    if drop_authors:
        seqs = [[v for v in seq if v not in wc.author_ids] for seq in wc.sequences]
    else:
        seqs = wc.sequences
    return sliding_pairs(seqs, window)


def export_walks(wc: WalkCorpus, labels: Sequence[str], path) -> None:
    """One sequence per line, space-separated node labels."""
    with open(path, "w", encoding="utf-8") as fh:
        for seq in wc.sequences:
            fh.write(" ".join(labels[v] for v in seq))
            fh.write("\n")


class NegativeSampler:
    """Draws tokens with probability proportional to count**power."""

    def __init__(self, tokens: list, probabilities: np.ndarray):
        self.tokens = tokens
        self.probabilities = probabilities
        self._cum = np.cumsum(probabilities)
        self._lookup = {tok: i for i, tok in enumerate(tokens)}

    def probability(self, token) -> float:
        idx = self._lookup.get(token)
        return 0.0 if idx is None else float(self.probabilities[idx])

    def sample(self, rng: np.random.Generator, size: int = 1) -> list:
        r = rng.random(size)
        idx = np.searchsorted(self._cum, r, side="right")
        idx = np.minimum(idx, len(self.tokens) - 1)
        return [self.tokens[i] for i in idx]


def build_negative_sampler(
    frequencies: Mapping[Hashable, int], power: float = 0.75
) -> NegativeSampler:
    """Unigram sampler over tokens with positive count, raised to `power`."""
    items = sorted(
        ((tok, cnt) for tok, cnt in frequencies.items() if cnt > 0),
        key=lambda kv: str(kv[0]),
    )
    if not items:
        raise DomainError("negative sampler needs at least one positive count")
    if any(cnt < 0 for _, cnt in frequencies.items()):
        raise DomainError("frequencies must be nonnegative")
    tokens = [tok for tok, _ in items]
    weights = np.array([cnt for _, cnt in items], dtype=np.float64) ** power
    return NegativeSampler(tokens, weights / weights.sum())

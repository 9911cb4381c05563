"""Desk-scale skipgram trainer, cosine plausibility, and SPPMI matrices.

The trainer keeps two weight tables per token: `hidden` (center/input vectors)
and `output` (context vectors).  The per-pair objective is the standard
negative-sampling loss

    -log sigmoid(output[ctx] . hidden[ctr])
    - sum over negatives n of log sigmoid(-output[n] . hidden[ctr])

optimized by plain SGD with a linearly decaying learning rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import DomainError, FormatError, TrainingDivergedError, ValidationError
from .walks import NegativeSampler


@dataclass
class EmbeddingTable:
    vocabulary: dict[str, int]
    hidden: np.ndarray
    output: np.ndarray
    flags: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return int(self.hidden.shape[1])

    def __post_init__(self):
        if self.hidden.shape != self.output.shape:
            raise ValidationError("hidden and output shapes differ")
        if self.hidden.shape[0] != len(self.vocabulary):
            raise ValidationError("matrix rows do not match vocabulary size")

    def index(self, token: str) -> int:
        if token not in self.vocabulary:
            raise LookupError(f"token {token!r} not in vocabulary")
        return self.vocabulary[token]


@dataclass(frozen=True)
class SkipgramConfig:
    dim: int = 64
    epochs: int = 5
    lr: float = 0.025
    negatives: int = 5
    seed: int = 0
    eval_sample: int = 2000

    def __post_init__(self):
        if self.dim < 1 or self.epochs < 0 or self.negatives < 0:
            raise ValidationError("dim >= 1, epochs >= 0, negatives >= 0 required")
        if self.lr <= 0:
            raise ValidationError("lr must be positive")


def _log_sigmoid(x: float) -> float:
    # stable: min(x, 0) - log1p(exp(-|x|))
    return min(x, 0.0) - math.log1p(math.exp(-abs(x)))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def skipgram_loss_and_grad(
    hidden: np.ndarray,
    output: np.ndarray,
    pairs: Sequence[tuple[int, int]],
    negatives: Sequence[Sequence[int]],
) -> tuple[float, np.ndarray, np.ndarray]:
    """Summed loss and full-table gradients for frozen (pair, negatives) lists."""
    g_hidden = np.zeros_like(hidden)
    g_output = np.zeros_like(output)
    loss = 0.0
    for (ctr, ctx), negs in zip(pairs, negatives):
        w = hidden[ctr]
        s = float(output[ctx] @ w)
        loss -= _log_sigmoid(s)
        coef = _sigmoid(s) - 1.0
        g_hidden[ctr] += coef * output[ctx]
        g_output[ctx] += coef * w
        for n in negs:
            sn = float(output[n] @ w)
            loss -= _log_sigmoid(-sn)
            cn = _sigmoid(sn)
            g_hidden[ctr] += cn * output[n]
            g_output[n] += cn * w
    return loss, g_hidden, g_output


def train_skipgram(
    pairs: Sequence[tuple[str, str]],
    neg: NegativeSampler,
    cfg: SkipgramConfig,
) -> tuple[EmbeddingTable, list[float]]:
    """SGD over positive pairs; returns the table and a per-epoch held-out loss trace.

    Vocabulary is the sorted union of pair tokens and sampler tokens.  Hidden
    vectors start uniform in (-0.5/dim, 0.5/dim); output vectors start at zero.
    """
    if not pairs:
        raise DomainError("train_skipgram needs at least one positive pair")
    tokens = sorted({t for p in pairs for t in p} | set(map(str, neg.tokens)))
    vocab = {tok: i for i, tok in enumerate(tokens)}
    rng = np.random.default_rng(cfg.seed)
    hidden = (rng.random((len(vocab), cfg.dim)) - 0.5) / cfg.dim
    output = np.zeros_like(hidden)

    idx_pairs = np.array([(vocab[c], vocab[x]) for c, x in pairs], dtype=np.int64)
    neg_lookup = np.array([vocab[str(t)] for t in neg.tokens], dtype=np.int64)
    cum = np.cumsum(neg.probabilities)

    def draw_negs(r: np.random.Generator, count: int) -> np.ndarray:
        pos = np.searchsorted(cum, r.random(count), side="right")
        return neg_lookup[np.minimum(pos, len(neg_lookup) - 1)]

    # frozen held-out sample scores each epoch with fixed negatives
    eval_n = min(cfg.eval_sample, len(idx_pairs))
    eval_idx = rng.choice(len(idx_pairs), size=eval_n, replace=False)
    eval_pairs = idx_pairs[eval_idx]
    eval_negs = [draw_negs(rng, cfg.negatives) for _ in range(eval_n)]

    def eval_loss() -> float:
        total, _, _ = skipgram_loss_and_grad(hidden, output, eval_pairs, eval_negs)
        return total / max(eval_n, 1)

    trace = [eval_loss()]
    total_steps = max(cfg.epochs * len(idx_pairs), 1)
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(idx_pairs))
        for p in order:
            lr = cfg.lr * max(1.0 - step / total_steps, 1e-4)
            step += 1
            ctr, ctx = idx_pairs[p]
            w = hidden[ctr]
            negs = draw_negs(rng, cfg.negatives)
            s = float(output[ctx] @ w)
            coef = _sigmoid(s) - 1.0
            dw = coef * output[ctx]
            output[ctx] -= lr * coef * w
            for n in negs:
                sn = float(output[n] @ w)
                cn = _sigmoid(sn)
                dw = dw + cn * output[n]
                output[n] -= lr * cn * w
            hidden[ctr] = w - lr * dw
        epoch_loss = eval_loss()
        if not math.isfinite(epoch_loss):
            raise TrainingDivergedError(
                f"skipgram loss became non-finite at epoch {epoch} (lr too high?)",
                trace,
            )
        trace.append(epoch_loss)

    table = EmbeddingTable(vocabulary=vocab, hidden=hidden, output=output)
    return table, trace


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    # clamp float rounding so results stay inside [-1, 1]
    return float(min(1.0, max(-1.0, u @ v / (nu * nv))))


def plausibility_score(
    table: EmbeddingTable, property_token: str, entity: str, mode: str = "output-hidden"
) -> float:
    """Cosine similarity between the property and entity vectors.

    output-hidden (the prediction mode) compares the property's output vector
    with the entity's hidden vector; hidden-hidden compares hidden vectors and
    is symmetric in its arguments.
    """
    pi = table.index(property_token)
    ei = table.index(entity)
    if mode == "output-hidden":
        return cosine(table.output[pi], table.hidden[ei])
    if mode == "hidden-hidden":
        return cosine(table.hidden[pi], table.hidden[ei])
    raise DomainError(f"unknown mode {mode!r}")


@dataclass
class SppmiSpec:
    """Counts feeding the (optionally deepwalk-modified) SPPMI matrix."""

    pair_counts: dict[tuple[int, int], int]
    marginals: dict[int, int]
    vocab_size: int
    dw_pair_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    dw_vocab_size: int = 0
    shift_k: float = 1.0
    alpha_mix: float = 0.0

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ValidationError("vocab_size must be >= 1")
        if self.shift_k <= 0:
            raise ValidationError("shift_k must be positive")
        sums: dict[int, int] = {}
        for (i, j), c in self.pair_counts.items():
            if c < 0 or int(c) != c:
                raise ValidationError(f"pair count for ({i},{j}) must be a nonnegative integer")
            if not (0 <= i < self.vocab_size and 0 <= j < self.vocab_size):
                raise ValidationError(f"pair ({i},{j}) outside vocabulary")
            sums[i] = sums.get(i, 0) + int(c)
        for i, m in self.marginals.items():
            if m < 0 or int(m) != m:
                raise ValidationError(f"marginal for {i} must be a nonnegative integer")
        for i, s in sums.items():
            if self.marginals.get(i, 0) != s:
                raise ValidationError(
                    f"marginal #({i})={self.marginals.get(i, 0)} != row sum {s}"
                )
        for (i, j), c in self.dw_pair_counts.items():
            if c < 0 or int(c) != c:
                raise ValidationError(f"deepwalk count for ({i},{j}) must be a nonnegative integer")
            if not (0 <= i < self.vocab_size and 0 <= j < self.vocab_size):
                raise ValidationError(f"deepwalk pair ({i},{j}) outside vocabulary")
        if self.dw_pair_counts and self.dw_vocab_size < 1:
            raise ValidationError("dw_vocab_size must be >= 1 when deepwalk counts are given")

    @classmethod
    def from_pairs(
        cls,
        pairs: Sequence[tuple[int, int]],
        vocab_size: int,
        dw_pairs: Sequence[tuple[int, int]] = (),
        dw_vocab_size: int = 0,
        shift_k: float = 1.0,
        alpha_mix: float = 0.0,
    ) -> "SppmiSpec":
        counts: dict[tuple[int, int], int] = {}
        marg: dict[int, int] = {}
        for i, j in pairs:
            counts[(i, j)] = counts.get((i, j), 0) + 1
            marg[i] = marg.get(i, 0) + 1
        dw_counts: dict[tuple[int, int], int] = {}
        for i, j in dw_pairs:
            dw_counts[(i, j)] = dw_counts.get((i, j), 0) + 1
        return cls(
            pair_counts=counts,
            marginals=marg,
            vocab_size=vocab_size,
            dw_pair_counts=dw_counts,
            dw_vocab_size=dw_vocab_size,
            shift_k=shift_k,
            alpha_mix=alpha_mix,
        )


def build_sppmi(spec: SppmiSpec) -> sparse.csr_array:
    """Shifted-positive matrix of association scores.

    assoc(i,j) = |V| #(i,j) / (k #(i) #(j))
               + alpha_mix |V|^2 #dw(i,j) / (k |Vdw| #(i) #(j))

    entry = max(0, log assoc); nonpositive assoc (possible when alpha_mix < 0)
    clamps to the positive-part floor.  Pairs whose text marginals vanish
    contribute nothing.
    """
    n = spec.vocab_size
    keys = set(spec.pair_counts) | set(spec.dw_pair_counts)
    rows, cols, data = [], [], []
    for i, j in sorted(keys):
        mi = spec.marginals.get(i, 0)
        mj = spec.marginals.get(j, 0)
        if mi == 0 or mj == 0:
            continue
        assoc = n * spec.pair_counts.get((i, j), 0) / (spec.shift_k * mi * mj)
        if spec.alpha_mix != 0.0 and spec.dw_pair_counts:
            assoc += (
                spec.alpha_mix
                * n
                * n
                * spec.dw_pair_counts.get((i, j), 0)
                / (spec.shift_k * spec.dw_vocab_size * mi * mj)
            )
        if assoc > 1.0:
            rows.append(i)
            cols.append(j)
            data.append(math.log(assoc))
    return sparse.csr_array(
        (np.array(data), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, n),
    )


def save_embedding(table: EmbeddingTable, hidden_path, output_path=None) -> None:
    """Text format: header `<vocab_size> <dim>`, then `<token> v1 ... vD` rows.

    Tokens may not contain whitespace.  Values use repr so a load round-trips
    bit-exact.
    """
    tokens = sorted(table.vocabulary, key=lambda t: table.vocabulary[t])
    for tok in tokens:
        if any(ch.isspace() for ch in tok):
            raise ValidationError(f"token {tok!r} contains whitespace; cannot export")
    targets = [(hidden_path, table.hidden)]
    if output_path is not None:
        targets.append((output_path, table.output))
    for path, matrix in targets:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(tokens)} {table.dim}\n")
            for tok in tokens:
                row = matrix[table.vocabulary[tok]]
                fh.write(tok + " " + " ".join(repr(float(x)) for x in row) + "\n")


def _load_matrix(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError(f"{path}: header must be `<vocab_size> <dim>`")
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer header") from exc
        tokens, rows = [], []
        for line_no, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != d + 1:
                raise FormatError(f"{path}: line {line_no}: expected {d} values")
            tokens.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if len(tokens) != n:
        raise FormatError(f"{path}: header says {n} rows, found {len(tokens)}")
    return tokens, np.array(rows, dtype=np.float64).reshape(n, d)


def load_embedding(hidden_path, output_path=None) -> EmbeddingTable:
    """Load the text format; a missing output file yields zeros, flagged."""
    tokens, hidden = _load_matrix(hidden_path)
    vocab = {tok: i for i, tok in enumerate(tokens)}
    if len(vocab) != len(tokens):
        raise FormatError(f"{hidden_path}: duplicate tokens")
    flags: tuple[str, ...] = ()
    if output_path is None:
        output = np.zeros_like(hidden)
        flags = ("output_missing",)
    else:
        out_tokens, output = _load_matrix(output_path)
        if out_tokens != tokens:
            raise FormatError("hidden and output files disagree on tokens")
    return EmbeddingTable(vocabulary=vocab, hidden=hidden, output=output, flags=flags)
